"""Exception taxonomy shared across the engine."""


class NutqError(Exception):
    """Base class for all engine errors."""


# -- audio ingestion / feature extraction ------------------------------------

class MalformedWav(NutqError):
    """RIFF/WAVE container is structurally broken (bad header or chunk sizes)."""


class UnsupportedFormat(NutqError):
    """WAV is well-formed but violates the recording contract (16 kHz / 16-bit / mono PCM)."""


class AudioTooShort(NutqError):
    """Signal shorter than one analysis frame."""


# -- model / decoding ---------------------------------------------------------

class DimensionMismatch(NutqError):
    """Feature vector dimensionality does not match the model."""


class EmptyInput(NutqError):
    """An operation received an empty feature sequence."""


class UnknownPhoneme(NutqError):
    """A phoneme id is absent from the acoustic model or inventory."""


class CompositionError(NutqError):
    """A transcript cannot be composed against the model."""


class NoValidPath(NutqError):
    """No complete left-to-right state path exists for the given frame count."""


class EmptyLexicon(NutqError):
    """Recognition requested against a lexicon with no entries."""


# -- grapheme-to-phoneme / dictionary -----------------------------------------

class UnvocalizedConsonant(NutqError):
    """A consonant carries neither a vowel mark nor sukun/shadda."""


class UnknownCharacter(NutqError):
    """Input contains a codepoint outside the supported Arabic set."""


class UnknownPhonemeSymbol(NutqError):
    """Dictionary line uses a symbol outside the 44-phoneme inventory."""


class DuplicateVariant(NutqError):
    """Dictionary defines a (word, variant) pair twice, or an orphan variant."""


# -- scoring ------------------------------------------------------------------

class EmptyReference(NutqError):
    """Label scoring needs a non-empty reference sequence."""


# -- training (warning-level) --------------------------------------------------

class UncoveredPhonemeWarning(UserWarning):
    """Inventory phonemes absent from the training corpus keep flat-start parameters."""
