// capt-infer/1 request/response schema (shared contract with the harness;
// conformance fixtures live in ../contract/capt-infer-fixtures.json).
import { z } from "zod";

export const evaluateRequestSchema = z
  .object({
    utt_id: z.string(),
    task: z.enum(["APA", "MDD"]),
    prompt: z.string().min(1),
    audio_b64: z.string().optional(),
    audio_url: z.string().optional(),
    temperature: z.number().min(0).default(0),
    max_new_tokens: z.number().int().positive().default(512),
  })
  .strip();

export type EvaluateRequest = z.infer<typeof evaluateRequestSchema>;

export interface TextResponse {
  text: string;
}

export interface ErrorResponse {
  error: string;
}

export function validationMessage(error: z.ZodError): string {
  return error.issues
    .map((issue) => `${issue.path.join(".") || "body"}: ${issue.message}`)
    .join("; ");
}
