/** JSON client for the annotation service. */

import { Assignment, Progress, ResponsePayload } from "./types.js";

export class VersionConflictError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "VersionConflictError";
  }
}

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

async function errorMessage(reply: Response): Promise<string> {
  try {
    const body = (await reply.json()) as { error?: string };
    return body.error ?? reply.statusText;
  } catch {
    return reply.statusText;
  }
}

/** Next open task for the coder, or null when everything is submitted. */
export async function fetchNextTask(
  baseUrl: string,
  coder: string,
): Promise<Assignment | null> {
  const reply = await fetch(
    `${baseUrl}/api/tasks/next?coder=${encodeURIComponent(coder)}`,
  );
  if (reply.status === 204) {
    return null;
  }
  if (!reply.ok) {
    throw new ValidationError(await errorMessage(reply));
  }
  return (await reply.json()) as Assignment;
}

export async function submitResponse(
  baseUrl: string,
  taskId: string,
  coder: string,
  expectedVersion: number,
  response: ResponsePayload,
): Promise<number> {
  const reply = await fetch(
    `${baseUrl}/api/tasks/${encodeURIComponent(taskId)}/submit`,
    {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        coder_id: coder,
        expected_version: expectedVersion,
        response,
      }),
    },
  );
  if (reply.status === 409) {
    throw new VersionConflictError(await errorMessage(reply));
  }
  if (!reply.ok) {
    throw new ValidationError(await errorMessage(reply));
  }
  const body = (await reply.json()) as { version: number };
  return body.version;
}

export async function fetchProgress(baseUrl: string): Promise<Progress> {
  const reply = await fetch(`${baseUrl}/api/progress`);
  if (!reply.ok) {
    throw new ValidationError(await errorMessage(reply));
  }
  return (await reply.json()) as Progress;
}
