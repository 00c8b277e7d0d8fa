import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // Integration tests spawn a real service process and drive it over HTTP.
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
