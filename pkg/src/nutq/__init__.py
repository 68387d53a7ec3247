"""Arabic pronunciation training toolkit.

Isolated-word GMM-HMM recognition and forced alignment over MFCC features,
an Arabic grapheme-to-phoneme front end, pronunciation feedback scoring,
and a small lesson service with an HTTP API.
"""

__version__ = "0.1.0"
