"""Exception hierarchy shared by every module."""


class AccConfError(Exception):
    """Base class for all package errors."""


class ParamSearchError(AccConfError):
    """No safe prime was found within the candidate budget."""


class NotInvertibleError(AccConfError, ZeroDivisionError):
    """gcd(a, modulus) != 1."""


class CapacityError(AccConfError):
    """No unused x-coordinate is left for a new share."""


class ThresholdError(AccConfError):
    """More revocations were requested than the block can absorb."""


class CryptoError(AccConfError):
    """Base for failures that mean 'you do not get the key'."""


class SignatureError(CryptoError):
    pass


class ExpiredError(CryptoError):
    pass


class RevokedShareError(CryptoError):
    """The share's x collides with an x carried in the block."""


class KeyDecodeError(CryptoError):
    """Recovered subkeys do not decode to a key with a valid checksum."""


class AuthenticationError(CryptoError):
    """Content tag mismatch on decrypt."""


class FormatError(AccConfError, ValueError):
    """Malformed or non-canonical serialized input."""


class ConfigError(AccConfError, ValueError):
    pass
