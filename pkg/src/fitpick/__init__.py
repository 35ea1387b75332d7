"""Interactive garment recommendation with a human (or proxy) in the loop.

The package is organized around the stages of the pipeline:

- ``fitpick.nn``: minimal dense/recurrent network substrate with exact
  backprop, used by every trainable component.
- ``fitpick.data``: dataset schema, manifest I/O and a synthetic world
  generator with a known ground-truth preference model.
- ``fitpick.preprocess``: feature compression (autoencoder) and candidate
  selection (k-means medoids).
- ``fitpick.gpbpr``: the personalized compatibility scorer used as a stand-in
  for human feedback, plus score normalization.
- ``fitpick.agent``: the feedback-driven recommendation agent and its
  Q-learning trainer.
- ``fitpick.baselines``: comparison policies (no-exploration, LSTM, random).
- ``fitpick.evaluation``: episode metrics and report emission.
- ``fitpick.service``: FastAPI session service for live episodes.
"""

__version__ = "0.1.0"
