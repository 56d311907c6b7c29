class ValidationError(ValueError):
    """An input violates a documented precondition or file contract."""
