import { mkdtempSync, writeFileSync } from "node:fs";
import { AddressInfo } from "node:net";
import os from "node:os";
import path from "node:path";
import { Express } from "express";
import { Server } from "node:http";

import { DEFAULTS, ShimConfig } from "../src/config.js";

export function testConfig(overrides: Partial<ShimConfig> = {}): ShimConfig {
  const dir = mkdtempSync(path.join(os.tmpdir(), "shim-test-"));
  const modelPath = path.join(dir, "model.bin");
  writeFileSync(modelPath, "checkpoint placeholder");
  return {
    modelPath,
    adapterPath: undefined,
    host: "127.0.0.1",
    port: 0,
    maxConcurrent: DEFAULTS.maxConcurrent,
    queueDepth: DEFAULTS.queueDepth,
    sampleRate: DEFAULTS.sampleRate,
    defaultTemperature: DEFAULTS.defaultTemperature,
    defaultMaxNewTokens: DEFAULTS.defaultMaxNewTokens,
    engineCommand: [],
    ...overrides,
  };
}

export interface RunningServer {
  url: string;
  close: () => Promise<void>;
}

export function startServer(app: Express): Promise<RunningServer> {
  return new Promise((resolve) => {
    const server: Server = app.listen(0, "127.0.0.1", () => {
      const { port } = server.address() as AddressInfo;
      resolve({
        url: `http://127.0.0.1:${port}`,
        close: () => new Promise((done) => server.close(() => done())),
      });
    });
  });
}

export async function postJson(url: string, body: unknown): Promise<{ status: number; json: any }> {
  const reply = await fetch(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: typeof body === "string" ? body : JSON.stringify(body),
  });
  return { status: reply.status, json: await reply.json() };
}

export const validRequest = {
  utt_id: "000010001",
  task: "MDD",
  prompt: "<|MDD|>\nTranscribe the audio utterance.",
  audio_url: "WAVE/SPEAKER0001/000010001.WAV",
  temperature: 0,
  max_new_tokens: 64,
};
