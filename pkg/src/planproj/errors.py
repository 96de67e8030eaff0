"""Shared argument-validation errors."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class Infeasible(Exception):
    """No value within the allowed search bounds satisfies the request."""
