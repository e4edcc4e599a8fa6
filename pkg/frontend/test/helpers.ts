import { readFileSync } from "node:fs";
import path from "node:path";

import { FIXTURES_DIR, BASE_URL } from "./setup/global.js";

export { BASE_URL, FIXTURES_DIR };

export interface FixtureMeta {
  queries: string[];
  replies: string[];
  golden_run_id: string;
}

export function fixtureMeta(): FixtureMeta {
  return JSON.parse(
    readFileSync(path.join(FIXTURES_DIR, "meta.json"), "utf-8"),
  ) as FixtureMeta;
}

export function goldenReport(): unknown {
  return JSON.parse(
    readFileSync(path.join(FIXTURES_DIR, "golden_report.json"), "utf-8"),
  );
}

export function freshSessionId(prefix: string): string {
  return `${prefix}-${Date.now()}-${Math.random().toString(36).slice(2, 8)}`;
}
