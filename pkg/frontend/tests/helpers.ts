import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** Load a recorded API response body from tests/fixtures/<name>.json. */
export function fixture<T>(name: string): T {
  return JSON.parse(
    readFileSync(join(here, "fixtures", `${name}.json`), "utf8")) as T;
}
