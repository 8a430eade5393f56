"""Robust information bottleneck toolkit.

Subpackages:
  gaussian      closed-form solvers and the brute-force oracle for jointly
                Gaussian data
  info_metrics  Fisher/entropy/mutual-information functionals and executable
                robustness checks
  gmm           two-class Gaussian-mixture robustness laboratory
  autodiff      minimal reverse-mode tape used by the variational trainer
  nets          stochastic MLP encoders, heads, losses and the Fisher penalty
  train         adaptive-moment training loop, checkpoints and gradient checks
  attacks       posterior-averaged prediction and FGSM evaluation
  datasets      synthetic generators and the IDX image/label file format
  cli           command-line front end (``rib`` entry point)
"""

__version__ = "0.1.0"
