// Minimal WAV handling: the shim owns audio decoding and resampling to the
// model's expected rate, so engines only ever see mono float samples.

export interface DecodedAudio {
  sampleRate: number;
  samples: Float32Array;
}

export function decodeWavBase64(b64: string): DecodedAudio {
  return decodeWav(Buffer.from(b64, "base64"));
}

/** PCM16/PCM32-float WAV decoder; multi-channel input is mixed down to mono. */
export function decodeWav(buffer: Buffer): DecodedAudio {
  if (buffer.length < 44 || buffer.toString("ascii", 0, 4) !== "RIFF" || buffer.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error("not a RIFF/WAVE payload");
  }
  let offset = 12;
  let format = 0;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let data: Buffer | null = null;
  while (offset + 8 <= buffer.length) {
    const chunkId = buffer.toString("ascii", offset, offset + 4);
    const chunkSize = buffer.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (chunkId === "fmt ") {
      format = buffer.readUInt16LE(body);
      channels = buffer.readUInt16LE(body + 2);
      sampleRate = buffer.readUInt32LE(body + 4);
      bitsPerSample = buffer.readUInt16LE(body + 14);
    } else if (chunkId === "data") {
      data = buffer.subarray(body, body + chunkSize);
    }
    offset = body + chunkSize + (chunkSize % 2);
  }
  if (!data || channels === 0) {
    throw new Error("WAVE payload has no data chunk");
  }
  let interleaved: Float32Array;
  if (format === 1 && bitsPerSample === 16) {
    interleaved = new Float32Array(data.length / 2);
    for (let i = 0; i < interleaved.length; i++) {
      interleaved[i] = data.readInt16LE(i * 2) / 32768;
    }
  } else if (format === 3 && bitsPerSample === 32) {
    interleaved = new Float32Array(data.length / 4);
    for (let i = 0; i < interleaved.length; i++) {
      interleaved[i] = data.readFloatLE(i * 4);
    }
  } else {
    throw new Error(`unsupported WAVE encoding: format=${format} bits=${bitsPerSample}`);
  }
  const frames = Math.floor(interleaved.length / channels);
  const mono = new Float32Array(frames);
  for (let frame = 0; frame < frames; frame++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) acc += interleaved[frame * channels + ch];
    mono[frame] = acc / channels;
  }
  return { sampleRate, samples: mono };
}

/** Linear-interpolation resampler; identity when rates already match. */
export function resample(audio: DecodedAudio, targetRate: number): DecodedAudio {
  if (audio.sampleRate === targetRate || audio.samples.length === 0) {
    return { sampleRate: targetRate, samples: audio.samples };
  }
  const ratio = audio.sampleRate / targetRate;
  const outLength = Math.max(1, Math.round(audio.samples.length / ratio));
  const out = new Float32Array(outLength);
  for (let i = 0; i < outLength; i++) {
    const position = i * ratio;
    const left = Math.floor(position);
    const right = Math.min(left + 1, audio.samples.length - 1);
    const frac = position - left;
    out[i] = audio.samples[left] * (1 - frac) + audio.samples[right] * frac;
  }
  return { sampleRate: targetRate, samples: out };
}

/** Test helper: render mono float samples as a PCM16 WAV buffer. */
export function encodeWavPcm16(samples: Float32Array, sampleRate: number): Buffer {
  const data = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    data.writeInt16LE(Math.round(clamped * 32767), i * 2);
  }
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(1, 20); // PCM
  header.writeUInt16LE(1, 22); // mono
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 2, 28);
  header.writeUInt16LE(2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(data.length, 40);
  return Buffer.concat([header, data]);
}
