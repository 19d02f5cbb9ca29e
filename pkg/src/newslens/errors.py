"""Exception types shared across modules."""


class NewslensError(Exception):
    """Base class for all newslens errors."""

    code = "internal_error"


class UnknownNode(NewslensError):
    code = "unknown_node"


class TaxonomyVersionMismatch(NewslensError):
    code = "taxonomy_version_mismatch"


class InvalidUrl(NewslensError):
    code = "invalid_url"


class SourceUnreachable(NewslensError):
    code = "source_unreachable"


class SelectionRuleMismatch(NewslensError):
    code = "selection_rule_mismatch"


class ExtractionFailed(NewslensError):
    code = "extraction_failed"


class StoreUnavailable(NewslensError):
    code = "store_unavailable"


class IntegrityViolation(NewslensError):
    code = "integrity_violation"


class InvalidSelector(NewslensError):
    code = "invalid_selector"


class MissingPlaceholder(NewslensError):
    code = "missing_placeholder"


class UnparsableResponse(NewslensError):
    code = "unparsable_response"


class InvalidLabel(NewslensError):
    code = "invalid_label"


class ProviderExhausted(NewslensError):
    code = "provider_exhausted"


class MissingSentenceData(NewslensError):
    code = "missing_sentence_data"


class TaskAlreadyResolved(NewslensError):
    code = "task_already_resolved"


class InvalidOverrideLabel(NewslensError):
    code = "invalid_override_label"


class InsufficientPopulation(NewslensError):
    code = "insufficient_population"


class EmptyPeriod(NewslensError):
    code = "empty_period"


class ConflictingProposal(NewslensError):
    code = "conflicting_proposal"


class StaleProposal(NewslensError):
    code = "stale_proposal"
