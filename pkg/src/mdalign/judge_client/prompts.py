"""Judge dimensions and prompt rendering."""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path

from ..errors import MissingTemplate, UnfilledPlaceholder

TEMPLATE_DIR = Path(__file__).parent / "templates"

PLACEHOLDERS = frozenset({"instruction", "clip_id", "dimension", "criterion"})


@dataclass(frozen=True)
class JudgeDimension:
    id: str
    template_id: str
    criterion: str


_DIMS = [
    ("alignment", "visual_audio_alignment",
     "rhythmic synchronization between motion accents and musical beats"),
    ("instruction_following", "video_instruction_following",
     "semantic compliance with the text instruction"),
    ("video_quality", "video_visual_quality",
     "imaging and aesthetic quality of the frames"),
    ("video_motion", "video_motion",
     "motion smoothness and dynamic degree"),
    ("video_consistency", "video_motion",
     "subject and background consistency over time"),
    ("audio_mos", "auditory_aesthetic",
     "overall audio quality"),
    ("production_complexity", "auditory_aesthetic",
     "production complexity: richness of arrangement, instrumentation and layering"),
    ("content_enjoyment", "auditory_aesthetic",
     "content enjoyment: how pleasant and engaging the music is to listen to"),
    ("production_quality", "auditory_aesthetic",
     "production quality: clarity, balance and absence of artifacts or noise"),
    ("content_usefulness", "auditory_aesthetic",
     "content usefulness: how usable the track would be as music for a dance video"),
]

DIMENSIONS = {d: JudgeDimension(d, t, c) for d, t, c in _DIMS}


def get_dimension(dim) -> JudgeDimension:
    if isinstance(dim, JudgeDimension):
        return dim
    try:
        return DIMENSIONS[dim]
    except KeyError:
        raise ValueError(f"unknown judge dimension {dim!r}; choose from {sorted(DIMENSIONS)}") from None


def render_prompt(dimension, instruction_text: str, clip_id: str = "", template_dir=None) -> str:
    """Fill the dimension's template.

    Unknown ``{placeholders}`` raise :class:`UnfilledPlaceholder`; literal
    braces in templates are written ``{{`` and ``}}``.
    """
    dim = get_dimension(dimension)
    path = Path(template_dir or TEMPLATE_DIR) / f"{dim.template_id}.txt"
    try:
        template = path.read_text(encoding="utf-8")
    except OSError:
        raise MissingTemplate(f"no template {path.name} for dimension {dim.id!r}") from None

    values = {"instruction": instruction_text, "clip_id": clip_id,
              "dimension": dim.id, "criterion": dim.criterion}
    out = []
    for literal, field, spec, conv in string.Formatter().parse(template):
        out.append(literal)
        if field is None:
            continue
        if field not in PLACEHOLDERS or spec or conv:
            raise UnfilledPlaceholder(f"{path.name}: unknown placeholder {{{field}}}")
        out.append(values[field])
    return "".join(out)
