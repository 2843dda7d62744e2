import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // the integration suite boots a real server and runs an optimizer job
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
