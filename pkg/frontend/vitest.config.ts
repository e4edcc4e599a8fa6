import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["./test/setup/global.ts"],
    include: ["test/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 120_000,
    // chat tests depend on dialogue history order within one scripted
    // session, so run files sequentially against the shared server
    fileParallelism: false,
  },
});
