import { execFile } from "node:child_process";
import { mkdirSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

// Child processes must run async: a blocking exec would starve the event
// loop and with it the in-process server the subprocess talks to.
const run = promisify(execFile);

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ClauseClassifier } from "../src/model.js";
import { createClassifierServer, listen } from "../src/serve.js";
import { train } from "../src/train.js";
import { KEYWORDS, overfitCorpus, validationCorpus } from "./helpers.js";

let model: ClauseClassifier;
let server: ReturnType<typeof createClassifierServer>;
let baseUrl: string;
const tmpDirs: string[] = [];

beforeAll(async () => {
  model = train(overfitCorpus(), validationCorpus(), { seed: 0 }).model;
  server = createClassifierServer(model);
  const port = await listen(server, 0);
  baseUrl = `http://127.0.0.1:${port}`;
});

afterAll(() => {
  server?.close();
  for (const dir of tmpDirs) rmSync(dir, { recursive: true, force: true });
});

async function post(body: unknown): Promise<Response> {
  return fetch(`${baseUrl}/classify`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: typeof body === "string" ? body : JSON.stringify(body),
  });
}

describe("classification endpoint", () => {
  it("implements the wire contract", async () => {
    const res = await post({ text: "jurisdiction jurisdiction jurisdiction" });
    expect(res.status).toBe(200);
    const data = (await res.json()) as { probabilities: number[] };
    expect(data.probabilities).toHaveLength(14);
    for (const p of data.probabilities) {
      expect(p).toBeGreaterThanOrEqual(0);
      expect(p).toBeLessThanOrEqual(1);
    }
    expect(data.probabilities[12]).toBeGreaterThan(0.5); // label 13
  });

  it("thresholded labels reproduce training labels on the overfit corpus", async () => {
    for (const clause of overfitCorpus().slice(0, 10)) {
      const res = await post({ text: clause.text });
      const data = (await res.json()) as { probabilities: number[] };
      const predicted = data.probabilities
        .map((p, i) => (p >= 0.5 ? i + 1 : 0))
        .filter((l) => l > 0);
      expect(predicted).toEqual(clause.labels);
    }
  });

  it("rejects empty text with 400", async () => {
    expect((await post({ text: "" })).status).toBe(400);
    expect((await post({ text: "   " })).status).toBe(400);
  });

  it("rejects malformed payloads with 400", async () => {
    expect((await post("{not json")).status).toBe(400);
    expect((await post({ wrong: "field" })).status).toBe(400);
    expect((await post({ text: 42 })).status).toBe(400);
  });

  it("404s unknown endpoints and reports health", async () => {
    const res = await fetch(`${baseUrl}/nope`, { method: "POST", body: "{}" });
    expect(res.status).toBe(404);
    const health = await fetch(`${baseUrl}/healthz`);
    expect(health.status).toBe(200);
  });

  it("answers concurrent requests consistently", async () => {
    const text = KEYWORDS[4]; // "obligation" -> label 5
    const responses = await Promise.all(
      Array.from({ length: 16 }, () => post({ text })),
    );
    const bodies = await Promise.all(
      responses.map((r) => r.json() as Promise<{ probabilities: number[] }>),
    );
    const first = JSON.stringify(bodies[0].probabilities);
    for (const body of bodies) {
      expect(JSON.stringify(body.probabilities)).toBe(first);
    }
  });
});

describe("cross-component integration", () => {
  it("passes the evaluation toolkit's protocol conformance check", async () => {
    const { stdout } = await run("python3", ["-m", "clausepipe.protocol_check", baseUrl]);
    expect(stdout).toContain("conforms");
  }, 30_000);

  it("focal-parity fixture check passes via the CLI", async () => {
    const { stdout } = await run("node", [
      join(__dirname, "..", "dist", "index.js"),
      "focal-parity",
      "--file",
      join(__dirname, "..", "fixtures", "focal_parity.jsonl"),
    ]);
    expect(stdout).toContain("focal parity OK on 1000 pairs");
  });

  it("serves a full evaluation pipeline run end to end", async () => {
    const work = mkdtempSync(join(tmpdir(), "clf-e2e-"));
    tmpDirs.push(work);
    const docsDir = join(work, "docs");
    mkdirSync(docsDir, { recursive: true });

    // Two documents whose clauses come from the training corpus, in the
    // evaluation toolkit's annotated format.
    const corpus = overfitCorpus();
    const docs = [corpus.slice(0, 3), corpus.slice(3, 6)];
    docs.forEach((clauses, i) => {
      const blocks = clauses
        .map(
          (c) =>
            `[INIT_CLAUSE]\n${c.text}\n[INIT_CLASSE]${c.labels.join(",")}[END_CLASSE]\n[END_CLAUSE]`,
        )
        .join("\n");
      writeFileSync(join(docsDir, `doc${i}.txt`), blocks + "\n");
    });

    const config = {
      input_dir: docsDir,
      out_dir: join(work, "runs"),
      run_id: "tsint",
      backends: {
        chat: { base_url: "mock:echo-segment", backoff_base: 0.0 },
        classify: { base_url: baseUrl },
      },
    };
    writeFileSync(join(work, "config.json"), JSON.stringify(config));

    await run("python3", ["-m", "clausepipe.cli", "run", "--config", join(work, "config.json")]);
    const report = JSON.parse(
      readFileSync(join(work, "runs", "tsint", "report.json"), "utf-8"),
    );
    expect(report.n_failed).toBe(0);
    expect(report.classification.weighted_f1).toBe(1);
    expect(report.classification.hamming_loss).toBe(0);
  }, 60_000);
});
