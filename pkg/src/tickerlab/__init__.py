"""Stock price forecasting with a scalar Kalman filter and from-scratch LSTMs."""
