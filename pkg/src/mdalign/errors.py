"""Exception hierarchy shared by every mdalign module.

Each concrete error carries a stable ``kind`` string; the bench harness
records it in ``errors.json`` so failures can be grouped without parsing
messages.
"""


class MDAlignError(Exception):
    kind = "error"


# audio_io
class UnreadableFile(MDAlignError):
    kind = "unreadable_file"


class UnsupportedEncoding(MDAlignError):
    kind = "unsupported_encoding"


class EmptyAudio(MDAlignError):
    kind = "empty_audio"


# beat_tracker
class AudioTooShort(MDAlignError):
    kind = "audio_too_short"


class NoPeriodicity(MDAlignError):
    kind = "no_periodicity"


# motion_kinetics
class SchemaViolation(MDAlignError):
    kind = "schema_violation"


class TooFewFrames(SchemaViolation):
    kind = "too_few_frames"


class InconsistentKeypointCount(SchemaViolation):
    kind = "inconsistent_keypoint_count"


class AllKeypointsBelowConfidence(MDAlignError):
    kind = "all_keypoints_below_confidence"


class NoAccents(MDAlignError):
    kind = "no_accents"


# align_metrics
class EmptyBeats(MDAlignError):
    kind = "empty_beats"


class EmptyAccents(MDAlignError):
    kind = "empty_accents"


class EmptyCorpus(MDAlignError):
    kind = "empty_corpus"


# judge_client
class MissingTemplate(MDAlignError):
    kind = "missing_template"


class UnfilledPlaceholder(MDAlignError):
    kind = "unfilled_placeholder"


class EndpointUnreachable(MDAlignError):
    kind = "endpoint_unreachable"


class UnparseableResponse(MDAlignError):
    kind = "unparseable_response"

    def __init__(self, message, text=""):
        super().__init__(message)
        self.text = text


class AuthFailure(MDAlignError):
    kind = "auth_failure"


# agreement_stats
class DegenerateVector(MDAlignError):
    kind = "degenerate_vector"


class DegenerateExpected(MDAlignError):
    kind = "degenerate_expected"


# bench_harness
class ManifestInvalid(MDAlignError):
    kind = "manifest_invalid"
