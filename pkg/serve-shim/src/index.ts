import { loadConfig } from "./config.js";
import { createEngine } from "./engine.js";
import { createServer } from "./server.js";

async function main(): Promise<void> {
  const config = loadConfig();
  const engine = createEngine(config);
  const app = createServer(config, engine);
  const server = app.listen(config.port, config.host, () => {
    console.log(`capt-serve-shim listening on http://${config.host}:${config.port}`);
    console.log(`model: ${config.modelPath}${config.adapterPath ? ` (+ adapter ${config.adapterPath})` : ""}`);
  });
  // requests arriving before this resolves get 503, per the contract
  await engine.start();
  console.log("engine ready");

  const shutdown = async () => {
    server.close();
    await engine.stop();
    process.exit(0);
  };
  process.on("SIGINT", shutdown);
  process.on("SIGTERM", shutdown);
}

main().catch((error) => {
  console.error(error instanceof Error ? error.message : error);
  process.exit(1);
});
