import { spawn, ChildProcessByStdio } from "node:child_process";
import readline from "node:readline";
import { Readable, Writable } from "node:stream";

import { DecodedAudio } from "./audio.js";
import { ShimConfig } from "./config.js";
import { EvaluateRequest } from "./contract.js";

export interface GenerateInput {
  request: EvaluateRequest;
  audio?: DecodedAudio;
}

/** A generation backend. The shim never parses or scores what it returns. */
export interface Engine {
  ready(): boolean;
  start(): Promise<void>;
  stop(): Promise<void>;
  generate(input: GenerateInput): Promise<string>;
}

/**
 * Deterministic placeholder engine: answers with well-formed payloads so the
 * wire contract (and everything downstream of it) can be exercised without
 * a checkpoint. Scores are a stable function of the utterance id.
 */
export class StubEngine implements Engine {
  private isReady = false;

  constructor(private readonly startupDelayMs = 0) {}

  ready(): boolean {
    return this.isReady;
  }

  async start(): Promise<void> {
    if (this.startupDelayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.startupDelayMs));
    }
    this.isReady = true;
  }

  async stop(): Promise<void> {
    this.isReady = false;
  }

  async generate(input: GenerateInput): Promise<string> {
    const { request } = input;
    if (request.task === "APA") {
      const base = 5 + (hash(request.utt_id) % 5);
      return `{'accuracy': ${base}, 'fluency': ${clampScore(base + 1)}, 'prosodic': ${base}, 'total': ${base}}`;
    }
    return "{'word_transcript': 'stub transcription', 'phoneme_transcript': 'DH AX'}";
  }
}

function hash(text: string): number {
  let value = 0;
  for (const ch of text) {
    value = (value * 31 + ch.codePointAt(0)!) >>> 0;
  }
  return value;
}

function clampScore(value: number): number {
  return Math.max(0, Math.min(10, value));
}

interface RunnerRequest {
  id: number;
  utt_id: string;
  task: string;
  prompt: string;
  temperature: number;
  max_new_tokens: number;
  adapter_path?: string;
  audio?: { sample_rate: number; samples_b64: string };
}

/**
 * Spawns an external runner process (e.g. scripts/phi4_runner.py holding the
 * actual checkpoint) and speaks line-delimited JSON over stdin/stdout:
 * one request object in, one {"id", "text"} or {"id", "error"} object out.
 * The runner prints {"ready": true} once the model is loaded.
 */
export class CommandEngine implements Engine {
  private child: ChildProcessByStdio<Writable, Readable, null> | null = null;
  private isReady = false;
  private nextId = 1;
  private pending = new Map<number, { resolve: (text: string) => void; reject: (err: Error) => void }>();

  constructor(private readonly config: ShimConfig) {
    if (config.engineCommand.length === 0) {
      throw new Error("engineCommand is empty");
    }
  }

  ready(): boolean {
    return this.isReady;
  }

  start(): Promise<void> {
    const [command, ...args] = this.config.engineCommand;
    const child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    this.child = child;
    const lines = readline.createInterface({ input: child.stdout });
    return new Promise((resolve, reject) => {
      child.once("error", reject);
      child.once("exit", (code) => {
        this.isReady = false;
        const error = new Error(`runner exited with code ${code}`);
        for (const waiter of this.pending.values()) waiter.reject(error);
        this.pending.clear();
      });
      lines.on("line", (line) => {
        let message: any;
        try {
          message = JSON.parse(line);
        } catch {
          return; // runners may log freely; only JSON lines are protocol
        }
        if (message.ready === true) {
          this.isReady = true;
          resolve();
          return;
        }
        const waiter = this.pending.get(message.id);
        if (!waiter) return;
        this.pending.delete(message.id);
        if (typeof message.text === "string") waiter.resolve(message.text);
        else waiter.reject(new Error(String(message.error ?? "runner returned no text")));
      });
    });
  }

  async stop(): Promise<void> {
    this.isReady = false;
    this.child?.kill();
    this.child = null;
  }

  generate(input: GenerateInput): Promise<string> {
    const child = this.child;
    if (!child || !this.isReady) {
      return Promise.reject(new Error("engine not ready"));
    }
    const id = this.nextId++;
    const payload: RunnerRequest = {
      id,
      utt_id: input.request.utt_id,
      task: input.request.task,
      prompt: input.request.prompt,
      temperature: input.request.temperature,
      max_new_tokens: input.request.max_new_tokens,
      adapter_path: this.config.adapterPath,
    };
    if (input.audio) {
      payload.audio = {
        sample_rate: input.audio.sampleRate,
        samples_b64: Buffer.from(input.audio.samples.buffer, input.audio.samples.byteOffset, input.audio.samples.byteLength).toString("base64"),
      };
    }
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      child.stdin.write(JSON.stringify(payload) + "\n");
    });
  }
}

export function createEngine(config: ShimConfig): Engine {
  if (config.engineCommand.length > 0) {
    return new CommandEngine(config);
  }
  return new StubEngine();
}
