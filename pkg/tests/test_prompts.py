import math
import pathlib

import pytest

from blobkit.errors import InvalidArgumentError
from blobkit.geometry import Blob, BlobLayout, BlobParameter, Canvas
from blobkit.layout_text import DescriptionLine
from blobkit.prompts import (
    PromptBundle,
    build_description_prompt,
    build_parameter_prompt,
)

DATA = pathlib.Path(__file__).parent / "data"
CANVAS = Canvas(512, 512)

APPENDIX_PARAM_DEMO = (
    "teddy-bear {major-radius: 162px; minor-radius: 76px; cx: 444px; cy: 258px; angle: 96}\n"
    "cat {major-radius: 137px; minor-radius: 116px; cx: 149px; 236cy: ?px; angle: 3}"
)
APPENDIX_DESC_DEMO = (
    "teddy-bear {The teddy bear in the close-up is white and has a large size. "
    "It is sitting next to a pink stuffed animal, which appears to be a dragon or "
    "a panda. The teddy bear is positioned on a bed, and it is surrounded by other "
    "stuffed animals, creating a cozy and playful scene.}\n"
    "cat {The cat in the close-up is a large, striped tabby cat. It has a "
    "distinctive black and brown striped pattern on its fur, which is quite "
    "noticeable. The cat appears to be sitting or standing on top of a stuffed "
    "animal, possibly a teddy bear, which adds a playful and curious element to "
    "the scene. The cat's size and style give it a unique and eye-catching "
    "appearance, making it an interesting subject for a close-up photo.}"
)
DEMO_CAPTION = "a teddy bear to the right of a cat"
TEST_CAPTION = "a teddy bear to the left of a bed"


def test_parameter_prompt_matches_golden_bytes():
    bundle = PromptBundle(
        test_caption=TEST_CAPTION,
        demonstrations=((DEMO_CAPTION, APPENDIX_PARAM_DEMO),),
    )
    prompt = build_parameter_prompt(bundle, CANVAS)
    golden = (DATA / "prompt_param_golden.txt").read_bytes()
    assert prompt.encode("utf-8") == golden


def test_description_prompt_matches_golden_bytes():
    bundle = PromptBundle(
        test_caption=TEST_CAPTION,
        demonstrations=((DEMO_CAPTION, APPENDIX_DESC_DEMO),),
    )
    prompt = build_description_prompt(bundle)
    golden = (DATA / "prompt_desc_golden.txt").read_bytes()
    assert prompt.encode("utf-8") == golden


def test_zero_demonstrations():
    bundle = PromptBundle(test_caption="two cats")
    prompt = build_parameter_prompt(bundle, CANVAS)
    assert prompt.startswith("Instruction: Given a sentence prompt")
    assert prompt.endswith("Prompt: two cats\nLayout:")
    assert prompt.count("Prompt:") == 1


def test_canvas_substitution():
    bundle = PromptBundle(test_caption="a dog")
    prompt = build_parameter_prompt(bundle, Canvas(256, 256))
    assert "256px wide and 256px high" in prompt
    assert "should not exceed 256px" in prompt
    assert "512" not in prompt


def test_non_square_canvas_uses_max_for_limit():
    bundle = PromptBundle(test_caption="a dog")
    prompt = build_parameter_prompt(bundle, Canvas(640, 480))
    assert "640px wide and 480px high" in prompt
    assert "should not exceed 640px" in prompt


def test_layout_demonstration_rendered_via_css():
    layout = BlobLayout(
        CANVAS,
        (
            Blob(
                BlobParameter(444, 258, 162, 76, math.radians(96)),
                "a teddy bear",
                "teddy-bear",
            ),
        ),
    )
    bundle = PromptBundle(test_caption="x", demonstrations=(("a bear", layout),))
    prompt = build_parameter_prompt(bundle, CANVAS)
    assert (
        "teddy-bear {major-radius: 162px; minor-radius: 76px; cx: 444px; "
        "cy: 258px; angle: 96}" in prompt
    )


def test_description_lines_demonstration():
    lines = (DescriptionLine("cat", "A cat."),)
    bundle = PromptBundle(test_caption="x", demonstrations=(("a cat", lines),))
    prompt = build_description_prompt(bundle)
    assert "cat {A cat.}" in prompt
    assert prompt.endswith("Prompt: x\nRegion Desc:")


def test_deterministic():
    bundle = PromptBundle(
        test_caption=TEST_CAPTION,
        demonstrations=((DEMO_CAPTION, APPENDIX_PARAM_DEMO),),
    )
    assert build_parameter_prompt(bundle, CANVAS) == build_parameter_prompt(bundle, CANVAS)


def test_custom_instruction_passthrough():
    bundle = PromptBundle(test_caption="x", system_instruction="Do the thing for {width}px.")
    prompt = build_parameter_prompt(bundle, Canvas(128, 128))
    assert prompt.startswith("Do the thing for 128px.")


def test_wrong_payload_type_rejected():
    bundle = PromptBundle(test_caption="x", demonstrations=(("cap", 42),))
    with pytest.raises(InvalidArgumentError):
        build_parameter_prompt(bundle, CANVAS)


def test_empty_caption_rejected():
    with pytest.raises(InvalidArgumentError):
        PromptBundle(test_caption="  ")
