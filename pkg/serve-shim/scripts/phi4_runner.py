#!/usr/bin/env python3
"""Reference runner for the command engine: holds the actual checkpoint.

Speaks line-delimited JSON on stdin/stdout:
    in:  {"id": 1, "utt_id": "...", "task": "APA", "prompt": "...",
          "temperature": 0.0, "max_new_tokens": 512,
          "audio": {"sample_rate": 16000, "samples_b64": "<f32le>"}}
    out: {"id": 1, "text": "..."} or {"id": 1, "error": "..."}
and prints {"ready": true} once the model is loaded.

Wire it into the shim with:

    SHIM_MODEL_PATH=/models/base \
    SHIM_ADAPTER_PATH=/models/adapter \
    SHIM_ENGINE_COMMAND="python3 scripts/phi4_runner.py /models/base /models/adapter" \
    npm start

Requires a GPU-capable host with `transformers` (and `peft` when an adapter
directory is given); it is not exercised by the shim's test suite.
"""

import base64
import json
import sys


def load_model(model_path, adapter_path):
    import torch
    from transformers import AutoModelForCausalLM, AutoProcessor

    processor = AutoProcessor.from_pretrained(model_path, trust_remote_code=True)
    model = AutoModelForCausalLM.from_pretrained(
        model_path,
        torch_dtype=torch.bfloat16 if torch.cuda.is_available() else torch.float32,
        device_map="auto",
        trust_remote_code=True,
    )
    if adapter_path:
        from peft import PeftModel

        model = PeftModel.from_pretrained(model, adapter_path)
    model.eval()
    return processor, model


def decode_audio(payload):
    import numpy as np

    raw = base64.b64decode(payload["samples_b64"])
    samples = np.frombuffer(raw, dtype=np.float32)
    return samples, int(payload["sample_rate"])


def generate(processor, model, request):
    import torch

    prompt = request["prompt"]
    chat = f"<|user|>{prompt}<|end|><|assistant|>"
    kwargs = {"text": chat, "return_tensors": "pt"}
    if request.get("audio"):
        samples, rate = decode_audio(request["audio"])
        kwargs["audios"] = [(samples, rate)]
    inputs = processor(**kwargs).to(model.device)
    with torch.no_grad():
        generated = model.generate(
            **inputs,
            max_new_tokens=int(request.get("max_new_tokens", 512)),
            do_sample=float(request.get("temperature", 0.0)) > 0.0,
            temperature=max(float(request.get("temperature", 0.0)), 1e-5),
        )
    new_tokens = generated[:, inputs["input_ids"].shape[1]:]
    return processor.batch_decode(new_tokens, skip_special_tokens=True)[0]


def main():
    model_path = sys.argv[1]
    adapter_path = sys.argv[2] if len(sys.argv) > 2 else None
    processor, model = load_model(model_path, adapter_path)
    print(json.dumps({"ready": True}), flush=True)
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        try:
            text = generate(processor, model, request)
            print(json.dumps({"id": request["id"], "text": text}), flush=True)
        except Exception as exc:  # surface per-request failures, keep serving
            print(json.dumps({"id": request["id"], "error": str(exc)}), flush=True)


if __name__ == "__main__":
    main()
