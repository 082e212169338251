"""
Running the bundled scenario
============================

The simulator scripts people walking past the robot, renders noisy
perception events from the robot's current pose, and reports how the
emitted strategies compare with the noise-free ideal.
"""

from engage.simulator import demo_scenario_path, load_scenario, run_scenario

sc = load_scenario(demo_scenario_path())
print(f"{sc.name}: {sc.n_frames} frames at {sc.frame_rate} Hz, seed {sc.seed}")

report = run_scenario(sc)
for tid, timeline in sorted(report.timelines.items()):
    print(f"track {tid}:")
    for t, strategy in timeline:
        print(f"  {t:6.3f} s  {strategy}")

m = report.metrics
print("switches:", m["switch_count"])
print("reaction delay (frames):", m["reaction_delay_frames"])
print(f"agreement outside transitions: {m['agreement_fraction']:.3f}")
print("greetings:", m["speak_count"], " avert commands:", m["avert_count"])
print("decision offset (s):", report.latency["decision_offset_s"])
