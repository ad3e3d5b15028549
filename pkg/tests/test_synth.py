import pytest

from hmsplace import GeneratorSpec, Sensitivity, gen_synthetic, io
from hmsplace.costs import sensitivity_of
from hmsplace.errors import ValidationError
from hmsplace.machine import default_machine


def test_same_seed_same_trace():
    spec = GeneratorSpec(noise_sigma=0.05)
    assert io.dumps(io.trace_to_dict(gen_synthetic(spec, 5))) == \
        io.dumps(io.trace_to_dict(gen_synthetic(spec, 5)))
    assert gen_synthetic(spec, 5) != gen_synthetic(spec, 6)


@pytest.mark.parametrize("seed", range(10))
def test_archetypes_classify_as_intended(seed):
    cfg = default_machine()
    tr = gen_synthetic(GeneratorSpec(streaming=3, chasing=3, idle=2), seed, cfg)
    for ph in tr.phases:
        for rec in ph.accesses:
            sens = sensitivity_of(rec, ph, cfg)
            if rec.object_id.startswith("s"):
                assert sens is Sensitivity.BANDWIDTH
            else:
                assert rec.object_id.startswith("p")
                assert sens is Sensitivity.LATENCY


def test_every_object_is_referenced_and_estimated():
    tr = gen_synthetic(GeneratorSpec(ref_prob=0.0), 1)
    for o in tr.objects:
        assert any(o.id in ph.referenced for ph in tr.phases)
        assert o.static_ref_estimate is not None
    assert all(o.static_ref_estimate is None
               for o in gen_synthetic(GeneratorSpec(static_estimates=False), 1).objects)


def test_spec_from_dict_parses_units_and_rejects_unknown_fields():
    spec = GeneratorSpec.from_dict({"size_min": "16 MiB", "compute_time": "50 ms"})
    assert spec.size_min == 16 * 2**20 and spec.compute_time == pytest.approx(0.05)
    with pytest.raises(ValidationError):
        GeneratorSpec.from_dict({"phases": 3})
    with pytest.raises(ValidationError):
        GeneratorSpec(iterations=1)
