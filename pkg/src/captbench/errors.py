"""Exception types shared across the package."""


class CaptBenchError(Exception):
    """Base class for all captbench errors."""


class InventoryError(CaptBenchError):
    pass


class DuplicatePhone(InventoryError):
    def __init__(self, symbol):
        super().__init__(f"duplicate phone symbol: {symbol!r}")
        self.symbol = symbol


class MissingUnk(InventoryError):
    def __init__(self):
        super().__init__("inventory does not contain the '<unk>' tag")


class IoFailure(InventoryError):
    def __init__(self, path, detail):
        super().__init__(f"cannot read inventory file {path}: {detail}")
        self.path = path


class UnknownPhone(CaptBenchError):
    def __init__(self, symbol, position):
        super().__init__(f"unknown phone {symbol!r} at position {position}")
        self.symbol = symbol
        self.position = position


class SchemaMismatch(CaptBenchError):
    def __init__(self, field, utt_id, detail=""):
        msg = f"schema mismatch in field {field!r} for utterance {utt_id!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.field = field
        self.utt_id = utt_id


class PhoneValidationError(CaptBenchError):
    def __init__(self, utt_id, position, symbol):
        super().__init__(
            f"utterance {utt_id!r}: phone {symbol!r} at position {position} "
            "is not in the inventory"
        )
        self.utt_id = utt_id
        self.position = position
        self.symbol = symbol


class ParseError(CaptBenchError):
    pass


class NoObjectFound(ParseError):
    def __init__(self):
        super().__init__("no object-like span found in model output")


class MissingKey(ParseError):
    def __init__(self, key):
        super().__init__(f"required key {key!r} not found in payload")
        self.key = key


class NonNumericValue(ParseError):
    def __init__(self, key, raw):
        super().__init__(f"value for key {key!r} is not numeric: {raw!r}")
        self.key = key
        self.raw = raw


class LengthMismatch(CaptBenchError):
    def __init__(self, expected, actual):
        super().__init__(f"flag vectors differ in length: {expected} vs {actual}")
        self.expected = expected
        self.actual = actual


class EmptyReference(CaptBenchError):
    def __init__(self):
        super().__init__("error rate is undefined for an empty reference")


class TooFewSamples(CaptBenchError):
    def __init__(self, needed, got):
        super().__init__(f"need at least {needed} samples, got {got}")
        self.needed = needed
        self.got = got


class NoScorableUtterances(CaptBenchError):
    def __init__(self, detail="no scorable utterances"):
        super().__init__(detail)


class BackendUnreachable(CaptBenchError):
    def __init__(self, url, detail):
        super().__init__(f"backend {url} unreachable: {detail}")
        self.url = url
