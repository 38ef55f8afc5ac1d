import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    environment: 'node',
    // The end-to-end suite boots a real API server process.
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
