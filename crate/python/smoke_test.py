"""Smoke test for the svgpipe extension module.

Build with `cargo build --release -p svgpipe-py`, then copy
target/release/libsvgpipe.so to svgpipe.so next to this script (or anywhere on
PYTHONPATH) and run it.
"""
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import svgpipe

ICON = (
    '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100">'
    '<rect x="10" y="10" width="40" height="40" fill="#336699"/>'
    '<path d="M60 60 h30 v30 h-30 z" fill="red"/>'
    '<circle cx="75" cy="25" r="15" fill="#222"/>'
    "</svg>"
)


def main():
    doc = svgpipe.Document.parse(ICON).normalize()
    assert doc.view_box == (0.0, 0.0, 200.0, 200.0)
    assert len(doc) == 3
    assert doc.path_data[0] == "M 20 20 L 100 20 L 100 100 L 20 100 Z"
    text = doc.to_svg()
    assert svgpipe.normalize_svg(ICON) == text
    assert svgpipe.Document.parse(text, strict=True) == doc

    valid, diagnostics = svgpipe.check_svg(text)
    assert valid and not diagnostics
    valid, diagnostics = svgpipe.check_svg("<svg><path d='M 0 0 S'/></svg>")
    assert not valid and diagnostics

    img = doc.render(224)
    assert (img.width, img.height) == (224, 224)
    assert len(img.pixels()) == 224 * 224 * 3
    again = svgpipe.Image.decode(img.to_png())
    assert svgpipe.ssim(img, again) == 1.0
    assert svgpipe.mse(img, again) == 0.0
    assert 0.0 <= svgpipe.mock_clip_score("a blue square", img) <= 100.0

    partial = svgpipe.derive_partial(doc, 7)
    assert 1 <= len(partial) < len(doc)
    assert svgpipe.preservation_check(partial, doc)

    train, test = svgpipe.split([f"r{i}" for i in range(100)], 10, 1)
    assert len(test) == 10 and len(train) == 90
    assert (train, test) == svgpipe.split([f"r{i}" for i in reversed(range(100))], 10, 1)

    lines = doc.trajectory(2.0).splitlines()
    assert lines and all(l[0] in "UD" for l in lines)

    pipeline = svgpipe.MockPipeline()
    runs = {
        "text_to_svg": pipeline.text_to_svg("q1", "a red kite", 3),
        "image_to_svg": pipeline.image_to_svg("q2", img, 3),
        "partialsvg_to_svg": pipeline.partialsvg_to_svg("q3", "a red kite", partial, 3),
        "partialimage_to_svg": pipeline.partialimage_to_svg("q4", "a red kite", partial.render(), 3),
    }
    expected = {"text_to_svg": 3, "image_to_svg": 2, "partialsvg_to_svg": 2, "partialimage_to_svg": 3}
    for task, raw in runs.items():
        result = json.loads(raw)
        assert result["task"] == task
        assert len(result["candidates"]) == expected[task]
        assert svgpipe.check_svg(result["output_svg"])[0]
    assert pipeline.text_to_svg("q1", "a red kite", 3) == runs["text_to_svg"]

    try:
        svgpipe.Document.parse("<svg", strict=True)
    except ValueError:
        pass
    else:
        raise AssertionError("malformed markup accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
