"""Smoke test for the planar_cocycles extension module."""

import json
import math

import planar_cocycles as pc


def main():
    pair = pc.MatrixTuple([[2, 1, 1, 1], [2, 1, 1, 2]])
    assert len(pair) == 2
    assert pair[0].classify() == "Proximal"
    assert pair.product("12").entries() == (pair[0] * pair[1]).entries()

    verdict, cert = pc.dominated(pair, depth=8)
    assert verdict == "Dominated", verdict
    assert cert.verify(pair)
    again = pc.MulticoneCertificate.from_json(cert.to_json())
    assert again.verify(pair)
    for start, length in cert.arcs():
        assert 0.0 <= start and start + length <= math.pi / 2

    lower, upper = pc.pressure(pc.MatrixTuple([[2, 0, 0, 2]]), 1.0, depth=6, kappa_depth=4)
    assert abs(lower - math.log(2)) < 1e-12 and abs(upper - math.log(2)) < 1e-12

    kappa, _ = pc.kappa(pair, depth=6)
    assert 0.0 < kappa <= 1.0

    assert pc.classify(pair, depth=8) == "HolderGibbs"
    triple = pc.MatrixTuple([[2, 1, 1, 1], [2, 1, 1, 2], [1, 0, 0, 1]])
    assert pc.classify(triple, depth=7) == "QuasiBernoulli"
    swap = pc.MatrixTuple([[1, 0, 0, 2], [0, 1, 1, 0]])
    record = json.loads(pc.classify_json(swap, depth=8))
    assert record["class"] == "GibbsTypeOnly", record["class"]

    for bad in ([[1, 2, 2, 4]], [[1, 0, 0]]):
        try:
            pc.MatrixTuple(bad)
        except (ValueError, TypeError):
            pass
        else:
            raise AssertionError(f"accepted {bad}")
    try:
        pc.classify(pair, s=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("accepted s = -1")
    print("smoke test passed")


if __name__ == "__main__":
    main()
