"""Exception types shared across the toolkit.

Every error raised on purpose derives from GhicorrError so callers (and the
CLI) can separate expected data/config problems from genuine bugs.
"""


class GhicorrError(Exception):
    pass


# --- ingestion / alignment ---------------------------------------------------

class DataError(GhicorrError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"required column missing from header: {column!r}")


class BadNumeric(DataError):
    def __init__(self, row, column, raw=""):
        self.row = row
        self.column = column
        self.raw = raw
        super().__init__(f"line {row}: cannot parse column {column!r} from {raw!r}")


class DuplicateTimestamp(DataError):
    def __init__(self, series, date, hour):
        self.series = series
        self.date = date
        self.hour = hour
        super().__init__(f"duplicate timestamp for {series}: {date} hour {hour}")


class UnknownChannel(DataError):
    def __init__(self, value, row=None):
        self.value = value
        self.row = row
        where = f"line {row}: " if row is not None else ""
        super().__init__(f"{where}unknown channel label {value!r}")


class NegativeInput(DataError):
    def __init__(self, message):
        super().__init__(message)


class EmptyIntersection(DataError):
    pass


class UnknownLocation(DataError):
    def __init__(self, location):
        self.location = location
        super().__init__(f"no rows found for location {location!r}")


class TooFewRows(DataError):
    pass


# --- feature building ---------------------------------------------------------

class FeatureError(GhicorrError):
    pass


class MissingChannel(FeatureError):
    def __init__(self, channel):
        self.channel = channel
        super().__init__(f"channel {channel!r} not present in dataset")


class MissingNeighbor(FeatureError):
    pass


class EmptyResult(FeatureError):
    pass


# --- regressors ----------------------------------------------------------------

class RegressorError(GhicorrError):
    pass


class DegenerateInput(RegressorError):
    pass


class NonFiniteInput(RegressorError):
    pass


class ShapeMismatch(RegressorError):
    pass


class NotFitted(RegressorError):
    pass


class WrongFamily(RegressorError):
    pass


# --- evaluation protocol --------------------------------------------------------

class SelectionError(GhicorrError):
    pass


class ZeroMeanTruth(SelectionError):
    pass


class LengthMismatch(SelectionError):
    pass


class BadK(SelectionError):
    pass


class SearchFailed(SelectionError):
    pass


# --- configuration ---------------------------------------------------------------

class ConfigError(GhicorrError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
