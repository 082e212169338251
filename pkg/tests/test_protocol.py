import json
import random

import pytest
from hypothesis import given, strategies as st

from engage.arbiter import AvertGaze, BodyRotate, HeadFollow, Idle, Speak, TorsoLift
from engage.core import EMOTIONS
from engage.protocol import (
    ProtocolError,
    emit_command,
    emit_event,
    parse_command,
    parse_event,
    read_events,
    write_commands,
)

from conftest import event_dict, make_obs


def line(**over):
    return json.dumps(event_dict(**over))


class TestParseEvent:
    def test_well_formed(self):
        obs = parse_event(line())
        assert obs.emotions.argmax() == ("happy", 1.0)
        assert (obs.yaw, obs.track_id, obs.bbox) == (0.0, 1, (0.5, 0.5, 0.1, 0.1))

    def test_renormalizes(self):
        emotions = {e: 0.0 for e in EMOTIONS}
        emotions.update(happy=0.45, neutral=0.45)
        obs = parse_event(line(emotions=emotions))
        assert obs.emotions["happy"] == pytest.approx(0.5, abs=1e-15)
        assert sum(obs.emotions.probs) == pytest.approx(1.0, abs=1e-12)

    def test_missing_yaw(self):
        d = event_dict()
        del d["yaw"]
        with pytest.raises(ProtocolError, match="missing field yaw") as info:
            parse_event(json.dumps(d), 7)
        assert (info.value.line, info.value.field) == (7, "yaw")

    def test_extra_keys_ignored(self):
        assert parse_event(line(camera="front", debug={"x": 1})).track_id == 1

    @pytest.mark.parametrize(
        "text, field",
        [
            ("{not json", None),
            ("[1, 2]", None),
            (line(yaw=120.0), "yaw"),
            (line(valence="high"), "valence"),
            (line(track_id=-3), "track_id"),
            (line(track_id=1.5), "track_id"),
            (line(bbox=[0.5, 0.5, 0.1]), "bbox"),
            (line(bbox=[0.5, 1.5, 0.1, 0.1]), "bbox.cy"),
            (line(emotions={"happy": 1.0}), "emotions"),
            (line(emotions={**{e: 0.1 for e in EMOTIONS}, "contempt": 0.2}), "emotions"),
            ('{"t": NaN}', None),
        ],
    )
    def test_errors_name_field(self, text, field):
        with pytest.raises(ProtocolError) as info:
            parse_event(text, 3)
        assert info.value.line == 3
        if field is not None:
            assert info.value.field == field

    def test_nan_literal_is_malformed(self):
        # NaN is not JSON; the decoder rejects it before any field is read
        with pytest.raises(ProtocolError, match="malformed"):
            parse_event(line().replace('"yaw": 0.0', '"yaw": NaN'))

    def test_out_of_range_names_field(self):
        with pytest.raises(ProtocolError) as info:
            parse_event(line(yaw=1e300))
        assert info.value.field == "yaw"


class TestEmitCommand:
    def test_speak(self):
        assert emit_command(Speak("hello", t=1.5, target=3)) == (
            '{"t":1.5,"cmd":"speak","target":3,"params":{"text":"hello"}}'
        )

    def test_idle(self):
        assert emit_command(Idle(t=2.0)) == '{"t":2.0,"cmd":"idle","target":null,"params":{}}'

    def test_head_follow(self):
        text = emit_command(HeadFollow(10, -5, t=0.0, target=1))
        assert json.loads(text)["params"] == {"pan": 10.0, "tilt": -5.0}
        assert '"params":{"pan":10.0,"tilt":-5.0}' in text

    def test_single_line(self):
        assert "\n" not in emit_command(Speak("two\nlines", t=0.0))

    def test_write_commands_block(self, tmp_path):
        import io

        buf = io.StringIO()
        n = write_commands(buf, [Idle(t=0.0), TorsoLift(1.0, t=0.0)])
        assert n == 2 and buf.getvalue().count("\n") == 2


floats = st.floats(-1e6, 1e6, allow_nan=False)
commands = st.one_of(
    st.builds(HeadFollow, floats, floats, t=floats, target=st.none() | st.integers(0, 99)),
    st.builds(AvertGaze, floats, floats, t=floats, target=st.none() | st.integers(0, 99)),
    st.builds(BodyRotate, floats, t=floats, target=st.none() | st.integers(0, 99)),
    st.builds(TorsoLift, st.floats(0, 1), t=floats, target=st.none() | st.integers(0, 99)),
    st.builds(Speak, st.text(min_size=1), t=floats, target=st.none() | st.integers(0, 99)),
    st.builds(Idle, t=floats),
)


@given(commands)
def test_command_round_trip(cmd):
    back = parse_command(emit_command(cmd))
    assert type(back) is type(cmd)
    assert back.params() == pytest.approx(cmd.params(), abs=1e-9) if not isinstance(cmd, Speak) else back == cmd
    assert back.t == pytest.approx(cmd.t, abs=1e-9) and back.target == cmd.target


@given(
    t=st.floats(0, 1e5), tid=st.integers(0, 2**31), yaw=st.floats(-90, 90), pitch=st.floats(-90, 90),
    roll=st.floats(-180, 180), v=st.floats(-1, 1), a=st.floats(-1, 1),
    cx=st.floats(0, 1), cy=st.floats(0, 1), w=st.floats(1e-3, 1), h=st.floats(1e-3, 1),
    probs=st.lists(st.floats(0, 1), min_size=7, max_size=7).filter(lambda x: sum(x) > 1e-3),
)
def test_event_round_trip(t, tid, yaw, pitch, roll, v, a, cx, cy, w, h, probs):
    from engage.core import normalize_emotions

    obs = make_obs(t=t, track_id=tid, yaw=yaw, pitch=pitch, roll=roll, valence=v, arousal=a,
                   bbox=(cx, cy, w, h), emotions=normalize_emotions(dict(zip(EMOTIONS, probs))))
    back = parse_event(emit_event(obs))
    assert back.track_id == obs.track_id
    for name in ("timestamp", "yaw", "pitch", "roll", "valence", "arousal"):
        assert getattr(back, name) == pytest.approx(getattr(obs, name), abs=1e-9)
    assert back.bbox == pytest.approx(obs.bbox, abs=1e-9)
    assert back.emotions.probs == pytest.approx(obs.emotions.probs, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_stream_survives_corruption(seed):
    rng = random.Random(seed)
    good = [line(t=k / 30) for k in range(50)]
    corrupt = ["{", "null", line(yaw=500), "garbage", line(emotions={}), '{"t": 1}', "\x00\x01", "[]"]
    stream, n_bad = [], 0
    for g in good:
        stream.append(g)
        if rng.random() < 0.3:
            stream.append(rng.choice(corrupt))
            n_bad += 1
    errors = []
    events = list(read_events(stream, errors))
    assert len(events) == len(good)
    assert len(errors) == n_bad
    assert all(isinstance(e, ProtocolError) and e.line is not None for e in errors)


def test_parse_command_rejects_bad_params():
    with pytest.raises(ProtocolError, match="params"):
        parse_command('{"t":0,"cmd":"speak","target":null,"params":{"pan":1}}')
    with pytest.raises(ProtocolError, match="unknown command"):
        parse_command('{"t":0,"cmd":"dance","target":null,"params":{}}')
