"""Exception hierarchy.

Every error carries a module-qualified ``code`` so the command line front end
can report failures uniformly.
"""

from __future__ import annotations


class BDomainError(Exception):
    code = "bdomain.error"


# geometry
class ParseError(BDomainError):
    code = "geometry.parse"


class InvalidSurface(BDomainError):
    """Base for surface invariant failures; ``witness`` names the offending simplex."""

    code = "geometry.invalid"

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotClosed(InvalidSurface):
    code = "geometry.not_closed"


class NotOriented(InvalidSurface):
    code = "geometry.not_oriented"


class NotConnected(InvalidSurface):
    code = "geometry.not_connected"


class Degenerate(InvalidSurface):
    code = "geometry.degenerate"


class InvalidSpec(BDomainError):
    code = "geometry.invalid_spec"


# morse
class NotMorse(BDomainError):
    code = "morse.not_morse"


class NotMorseAfterTieBreak(NotMorse):
    code = "morse.not_morse_after_tie_break"


class PerturbationFailed(BDomainError):
    code = "morse.perturbation_failed"


# reeb
class CriticalHeight(BDomainError):
    code = "reeb.critical_height"


# wirg
class SchemaError(BDomainError):
    code = "wirg.schema"

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class InvalidWIRG(BDomainError):
    code = "wirg.invalid"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class GraphNotConnected(BDomainError):
    code = "wirg.not_connected"


# rewrite
class UnknownTypePair(BDomainError):
    code = "rewrite.unknown_type_pair"


# diagram
class LexError(BDomainError):
    code = "diagram.lex"


class StrandCountError(BDomainError):
    code = "diagram.strand_count"

    def __init__(self, message: str, position: int, count: int):
        super().__init__(f"token {position}: {message} (running strand count {count})")
        self.position = position
        self.count = count


class PatternMismatch(BDomainError):
    code = "diagram.pattern_mismatch"


# visibility
class MissingMarks(BDomainError):
    code = "visibility.missing_marks"
