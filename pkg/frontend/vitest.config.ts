import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // the live-service test boots a server and runs five model fits
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
