/** HTTP serving of the classification wire contract.
 *
 * POST /classify with {"text": "<clause>"} returns
 * {"probabilities": [p1..p14]}. Malformed JSON, a missing or non-string
 * text field, and empty text are all 400s; anything else is never silently
 * coerced. GET /healthz reports readiness.
 */

import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";

import { ClauseClassifier } from "./model.js";

function sendJson(res: ServerResponse, status: number, body: unknown): void {
  const data = JSON.stringify(body);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(data),
  });
  res.end(data);
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

export function createClassifierServer(model: ClauseClassifier): Server {
  return createServer(async (req, res) => {
    if (req.method === "GET" && req.url === "/healthz") {
      sendJson(res, 200, { status: "ok" });
      return;
    }
    if (req.method !== "POST" || req.url !== "/classify") {
      sendJson(res, 404, { error: "unknown endpoint" });
      return;
    }
    let payload: unknown;
    try {
      payload = JSON.parse(await readBody(req));
    } catch {
      sendJson(res, 400, { error: "request body is not valid JSON" });
      return;
    }
    const text = (payload as { text?: unknown })?.text;
    if (typeof text !== "string") {
      sendJson(res, 400, { error: "field 'text' must be a string" });
      return;
    }
    if (text.trim().length === 0) {
      sendJson(res, 400, { error: "field 'text' must be non-empty" });
      return;
    }
    sendJson(res, 200, { probabilities: model.probabilities(text) });
  });
}

export function listen(server: Server, port: number): Promise<number> {
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") resolve(address.port);
      else reject(new Error("could not determine bound port"));
    });
  });
}
