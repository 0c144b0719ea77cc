"""Human revision workflow: journaled decision store and HTTP service."""

from .store import Action, Decision, ReviewStore, RevisionStats  # noqa: F401
