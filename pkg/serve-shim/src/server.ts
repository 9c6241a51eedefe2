import express, { Express, NextFunction, Request, Response } from "express";

import { DecodedAudio, decodeWavBase64, resample } from "./audio.js";
import { ShimConfig } from "./config.js";
import { evaluateRequestSchema, validationMessage } from "./contract.js";
import { Engine } from "./engine.js";

/**
 * Bounded concurrency gate: up to `limit` requests generate at once, up to
 * `queueDepth` more wait their turn, anything beyond that is shed (429).
 */
export class Gate {
  private active = 0;
  private queue: Array<() => void> = [];

  constructor(private readonly limit: number, private readonly queueDepth: number) {}

  tryAcquire(): Promise<void> | null {
    if (this.active < this.limit) {
      this.active++;
      return Promise.resolve();
    }
    if (this.queue.length >= this.queueDepth) {
      return null;
    }
    return new Promise((resolve) => {
      this.queue.push(() => {
        this.active++;
        resolve();
      });
    });
  }

  release(): void {
    this.active--;
    const next = this.queue.shift();
    if (next) next();
  }

  get inFlight(): number {
    return this.active;
  }
}

export function createServer(config: ShimConfig, engine: Engine): Express {
  const app = express();
  app.use(express.json({ limit: "64mb" }));
  const gate = new Gate(config.maxConcurrent, config.queueDepth);

  app.get("/healthz", (_req, res) => {
    res.status(200).json({ status: "ok", ready: engine.ready() });
  });

  app.post("/v1/evaluate", async (req, res) => {
    const parsed = evaluateRequestSchema.safeParse(req.body ?? {});
    if (!parsed.success) {
      res.status(422).json({ error: validationMessage(parsed.error) });
      return;
    }
    if (!engine.ready()) {
      res.status(503).json({ error: "model loading" });
      return;
    }
    const ticket = gate.tryAcquire();
    if (ticket === null) {
      res.status(429).json({ error: "queue full" });
      return;
    }
    await ticket;
    try {
      let audio: DecodedAudio | undefined;
      if (parsed.data.audio_b64) {
        audio = resample(decodeWavBase64(parsed.data.audio_b64), config.sampleRate);
      }
      const text = await engine.generate({ request: parsed.data, audio });
      res.status(200).json({ text });
    } catch (error) {
      res.status(500).json({ error: error instanceof Error ? error.message : String(error) });
    } finally {
      gate.release();
    }
  });

  // malformed JSON bodies are a validation failure, same shape as 422s above
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (err instanceof SyntaxError) {
      res.status(422).json({ error: `invalid JSON body: ${err.message}` });
      return;
    }
    next(err);
  });

  return app;
}
