"""Exception hierarchy shared by every module."""


class TextDifficultyError(Exception):
    """Base class for all package errors."""


class ConfigError(TextDifficultyError):
    """Invalid options or configuration."""


class ParseError(TextDifficultyError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class EmptyDatasetError(TextDifficultyError):
    """A file or split holds no data items."""


class EmptyDistributionError(TextDifficultyError):
    """A count distribution would have zero total mass."""


class ZeroVarianceError(TextDifficultyError):
    """Correlation is undefined because one input is constant."""


class AlignmentError(TextDifficultyError):
    """Statistic and score matrices do not cover the same datasets."""

    def __init__(self, missing_in_stats, missing_in_scores):
        self.missing_in_stats = sorted(missing_in_stats)
        self.missing_in_scores = sorted(missing_in_scores)
        parts = []
        if self.missing_in_stats:
            parts.append("missing from stat matrix: " + ", ".join(self.missing_in_stats))
        if self.missing_in_scores:
            parts.append("missing from score matrix: " + ", ".join(self.missing_in_scores))
        super().__init__("; ".join(parts) or "dataset order differs")
