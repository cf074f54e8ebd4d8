"""Smoke test for the compiled extension: parse, classify, a CLI report and a small suite."""
import json

import planar_affine_py as pa


def main():
    text = pa.parse("(x^2*y - x)*dx + y*dy", order=6)
    assert pa.parse(text, order=6) == text, text

    c = pa.classify_field("-x*dx + 2*y*dy")
    assert c["subtype"] == "resonant" and (c["p"], c["q"]) == (1, 2), c

    code, out = pa.run(["--json", "invariants", "(x^2*y - x)*dx + y*dy"])
    rep = json.loads(out)
    assert code == 0 and rep["k"] == 1 and rep["mu"] == "0", rep

    code, out = pa.run(["--json", "classify", "x*dx +"])
    assert code == 2 and json.loads(out)["error"]["kind"] == "syntax"

    try:
        pa.parse("dx/dy")
    except ValueError as e:
        assert "syntax" in str(e)
    else:
        raise AssertionError("expected a syntax error")

    v = pa.verify("parser", trials=5, seed=3)
    assert v["pass"], v
    print("smoke test ok")


if __name__ == "__main__":
    main()
