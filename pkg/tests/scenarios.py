"""Small scenario builders shared by simulator, CLI and acceptance tests."""

from engage.simulator import scenario_from_dict


def person(tid=1, label="happy", deviation=0.0, alpha=0.0, beta=0.0, **extra):
    p = {
        "track_id": tid,
        "bearing": [{"t": 0.0, "alpha": alpha, "beta": beta}],
        "head_offset": [{"t": 0.0, "deviation": deviation}],
        "emotions": [{"t": 0.0, "label": label}],
    }
    p.update(extra)
    return p


def scenario_doc(persons=(), duration=3.0, seed=0, flicker=0.0, concentration=None, sigma=0.0, rate=30):
    return {
        "version": 1,
        "name": "test",
        "duration": duration,
        "frame_rate": rate,
        "seed": seed,
        "noise": {"flicker": flicker, "concentration": concentration, "angle_sigma": sigma},
        "persons": list(persons),
    }


def scenario(*persons, **kw):
    return scenario_from_dict(scenario_doc(persons, **kw))
