class ValidationError(ValueError):
    """Input violates a documented precondition (CLI exit code 2)."""


class SchemaError(ValueError):
    """File carries an unexpected schema version (CLI exit code 3)."""
