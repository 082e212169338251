"""
From sentiment to robot commands
================================

The sentiment state picks a strategy from the table; the arbiter turns the
strategy into torso, head, body and speech commands for one target.
"""

from engage import EngineConfig
from engage.arbiter import RobotState, plan_commands, select_target
from engage.attention import Bearing
from engage.core import ALL_SENTIMENT_STATES
from engage.policy import select_strategy
from engage.protocol import emit_command

cfg = EngineConfig()

# the whole table
for state in ALL_SENTIMENT_STATES:
    print(f"{state.key():28s} -> {select_strategy(state, cfg).value}")

# two people: a smiling one and a scared one; avoiding the scared one wins
people = [
    (1, None, select_strategy(ALL_SENTIMENT_STATES[0], cfg), (0.3, 0.5, 0.10, 0.12)),
    (2, None, select_strategy(ALL_SENTIMENT_STATES[2], cfg), (0.6, 0.5, 0.08, 0.10)),
]
print("target:", select_target(people))

# engaging someone far to the side needs the base to turn
robot = RobotState()
robot, cmds = plan_commands(select_strategy(ALL_SENTIMENT_STATES[0], cfg), Bearing(75.0, 5.0), robot, cfg, target=1)
for c in cmds:
    print(emit_command(c))

# the greeting is not repeated within the same episode
robot, cmds = plan_commands(select_strategy(ALL_SENTIMENT_STATES[0], cfg), Bearing(0.0, 0.0), robot, cfg, target=1)
print([c.kind for c in cmds])

# avoid: keep the face just outside the central cone
robot, cmds = plan_commands(select_strategy(ALL_SENTIMENT_STATES[2], cfg), Bearing(3.0, 0.0), RobotState(), cfg, target=2)
for c in cmds:
    print(emit_command(c))
