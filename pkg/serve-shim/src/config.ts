import fs from "node:fs";

export interface ShimConfig {
  modelPath: string;
  adapterPath?: string;
  host: string;
  port: number;
  maxConcurrent: number;
  queueDepth: number;
  sampleRate: number; // the model's expected audio rate
  defaultTemperature: number;
  defaultMaxNewTokens: number;
  /** command line spawned by the command engine; empty -> stub engine */
  engineCommand: string[];
}

export const DEFAULTS = {
  host: "127.0.0.1",
  port: 9000,
  maxConcurrent: 1,
  queueDepth: 16,
  sampleRate: 16000,
  defaultTemperature: 0,
  defaultMaxNewTokens: 512,
};

export function loadConfig(env: NodeJS.ProcessEnv = process.env): ShimConfig {
  const modelPath = env.SHIM_MODEL_PATH;
  if (!modelPath) {
    throw new Error("SHIM_MODEL_PATH is required");
  }
  const config: ShimConfig = {
    modelPath,
    adapterPath: env.SHIM_ADAPTER_PATH || undefined,
    host: env.SHIM_HOST || DEFAULTS.host,
    port: intOr(env.SHIM_PORT, DEFAULTS.port),
    maxConcurrent: intOr(env.SHIM_MAX_CONCURRENT, DEFAULTS.maxConcurrent),
    queueDepth: intOr(env.SHIM_QUEUE_DEPTH, DEFAULTS.queueDepth),
    sampleRate: intOr(env.SHIM_SAMPLE_RATE, DEFAULTS.sampleRate),
    defaultTemperature: floatOr(env.SHIM_TEMPERATURE, DEFAULTS.defaultTemperature),
    defaultMaxNewTokens: intOr(env.SHIM_MAX_NEW_TOKENS, DEFAULTS.defaultMaxNewTokens),
    engineCommand: env.SHIM_ENGINE_COMMAND ? env.SHIM_ENGINE_COMMAND.split(/\s+/) : [],
  };
  validateConfig(config);
  return config;
}

export function validateConfig(config: ShimConfig): void {
  if (!fs.existsSync(config.modelPath)) {
    throw new Error(`model path does not exist: ${config.modelPath}`);
  }
  if (config.adapterPath && !fs.existsSync(config.adapterPath)) {
    throw new Error(`adapter path does not exist: ${config.adapterPath}`);
  }
  if (config.maxConcurrent < 1) {
    throw new Error("maxConcurrent must be >= 1");
  }
  if (config.queueDepth < 0) {
    throw new Error("queueDepth must be >= 0");
  }
}

function intOr(raw: string | undefined, fallback: number): number {
  if (raw === undefined || raw === "") return fallback;
  const value = Number.parseInt(raw, 10);
  if (Number.isNaN(value)) throw new Error(`not an integer: ${raw}`);
  return value;
}

function floatOr(raw: string | undefined, fallback: number): number {
  if (raw === undefined || raw === "") return fallback;
  const value = Number.parseFloat(raw);
  if (Number.isNaN(value)) throw new Error(`not a number: ${raw}`);
  return value;
}
