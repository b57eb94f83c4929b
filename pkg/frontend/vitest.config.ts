import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    globalSetup: ["tests/setup/service.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
