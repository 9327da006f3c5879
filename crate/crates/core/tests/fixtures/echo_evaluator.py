import json
import sys

# Scores a trial by the mean of its numeric values, squashed into [0, 1].
for line in sys.stdin:
    msg = json.loads(line)
    if msg.get("shutdown"):
        break
    nums = [v for v in msg["values"].values() if isinstance(v, (int, float))]
    score = 1.0 / (1.0 + sum(abs(v) for v in nums) / max(len(nums), 1))
    reply = {"protocol_version": 1, "trial_id": msg["trial_id"], "score": score}
    if msg["trial_id"] == 3:
        reply = {"trial_id": 3, "error": "diverged"}
    print(json.dumps(reply), flush=True)
