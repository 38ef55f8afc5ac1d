"""Few-shot prompt builders for layout and region-description generation.

A prompt is: a system instruction, then one stanza per demonstration
(``Prompt: <caption>`` followed by ``Layout:`` or ``Region Desc:`` and the
demonstration body), then the test stanza ending right after its header so
the language model continues from there. Rendering is deterministic and
byte-stable; no transport is included — prompts go out as plain text.

The built-in instruction templates carry three substitution slots,
``{width}``, ``{height}`` and ``{limit}``, replaced by literal token
substitution (not str.format, which would trip over the CSS braces).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgumentError
from .geometry import BlobLayout, Canvas
from .layout_text import (
    DescriptionLine,
    format_description_line,
    serialize_css,
    serialize_descriptions,
)

PARAMETER_INSTRUCTION_TEMPLATE = (
    "Instruction: Given a sentence prompt that will be used to generate an "
    "image, plan the layout of the image. The generated layout should follow "
    "the CSS style, where each line starts with the object name and is "
    "followed by its absolute position depicted as an ellipse. Formally, each "
    'line should be like "object {major-radius: ?px; minor-radius: ?px; '
    'cx: ?px; cy: ?px; angle: ?}". The image is {width}px wide and {height}px '
    "high. Therefore, all properties of the positions (including "
    "major-radius, minor-radius, cx and cy) should not exceed {limit}px, and "
    "the value of angle is in degree and it should be within [0, 180]. "
    "Finally, we prefer all objects to be large (i.e., each ellipse better "
    "has a large major-radius), if possible."
)

DESCRIPTION_INSTRUCTION = (
    "Instruction: Given a sentence prompt that will be used to generate an "
    "image, plan the region descriptions of the image, where each line "
    "starts with the object name. For example, each line should be like "
    '"cat {The cat in the close-up is a large, gray and white cat with a '
    "fluffy appearance. The cat's size and style suggest that it is a "
    "domesticated cat, likely a house cat, and it is comfortable in its "
    "environment. The cat's gray and white coloration adds to its unique "
    'and visually appealing appearance.}". The generated region description '
    "should describe the object in the close-up and focus on its color, "
    "appearance, size, and style, etc."
)


@dataclass(frozen=True)
class PromptBundle:
    """Demonstrations are (caption, payload) pairs; payload may be a
    BlobLayout, a sequence of DescriptionLine, or pre-rendered text (so noisy
    demonstration material can be passed through verbatim)."""

    test_caption: str
    demonstrations: tuple = ()
    system_instruction: str = ""  # empty: use the builder's template

    def __post_init__(self):
        if not self.test_caption.strip():
            raise InvalidArgumentError("test caption must be non-empty")
        for i, pair in enumerate(self.demonstrations):
            if len(pair) != 2 or not str(pair[0]).strip():
                raise InvalidArgumentError(f"demonstration {i} needs (caption, payload)")


def substitute_canvas(template: str, canvas: Canvas) -> str:
    return (
        template.replace("{width}", str(canvas.width))
        .replace("{height}", str(canvas.height))
        .replace("{limit}", str(max(canvas.width, canvas.height)))
    )


def _demo_body(payload, renderer) -> str:
    if isinstance(payload, str):
        return payload.rstrip("\n")
    return renderer(payload).rstrip("\n")


def _render(instruction: str, header: str, bundle: PromptBundle, renderer) -> str:
    parts = [instruction, ""]
    for caption, payload in bundle.demonstrations:
        parts.append(f"Prompt: {caption}")
        parts.append(header)
        parts.append(_demo_body(payload, renderer))
        parts.append("")
    parts.append(f"Prompt: {bundle.test_caption}")
    parts.append(header)
    return "\n".join(parts)


def build_parameter_prompt(bundle: PromptBundle, canvas: Canvas) -> str:
    instruction = bundle.system_instruction or PARAMETER_INSTRUCTION_TEMPLATE
    instruction = substitute_canvas(instruction, canvas)

    def renderer(payload):
        if isinstance(payload, BlobLayout):
            return serialize_css(payload)
        raise InvalidArgumentError(
            f"parameter demonstrations take a BlobLayout or text, got {type(payload).__name__}"
        )

    return _render(instruction, "Layout:", bundle, renderer)


def build_description_prompt(bundle: PromptBundle) -> str:
    instruction = bundle.system_instruction or DESCRIPTION_INSTRUCTION

    def renderer(payload):
        if isinstance(payload, BlobLayout):
            return serialize_descriptions(payload)
        if isinstance(payload, (list, tuple)) and all(
            isinstance(x, DescriptionLine) for x in payload
        ):
            return "\n".join(format_description_line(d) for d in payload)
        raise InvalidArgumentError(
            "description demonstrations take a BlobLayout, DescriptionLine "
            f"sequence, or text, got {type(payload).__name__}"
        )

    return _render(instruction, "Region Desc:", bundle, renderer)
