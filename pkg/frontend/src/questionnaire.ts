/**
 * Post-session questionnaire rendering: prompts come verbatim from the
 * server payload (never hard-coded here), values are integer sliders
 * clamped to the payload's scale.
 */

import type { QuestionnairePayload, QuestionnaireBody } from "./types.js";

export function clampToScale(value: number, scale: [number, number]): number {
  const rounded = Math.round(value);
  return Math.min(scale[1], Math.max(scale[0], rounded));
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function sliderHtml(name: string, prompt: string, scale: [number, number],
                    anchors?: Record<string, string>, stimulusId?: string): string {
  const anchorText = anchors
    ? Object.entries(anchors)
        .map(([k, v]) => `${escapeHtml(k)} ${escapeHtml(v)}`)
        .join(" &hellip; ")
    : "";
  const subject = stimulusId
    ? `<span class="subject" data-stimulus="${escapeHtml(stimulusId)}"></span>`
    : "";
  return [
    `<fieldset class="question" data-question="${name}">`,
    `<legend>${escapeHtml(prompt)}</legend>`,
    subject,
    `<input type="range" name="${name}" min="${scale[0]}" max="${scale[1]}"`,
    ` step="1" value="${scale[0]}" list="ticks-${name}">`,
    `<output for="${name}">${scale[0]}</output>`,
    anchorText ? `<div class="anchors">${anchorText}</div>` : "",
    `</fieldset>`,
  ].join("");
}

export function questionnaireHtml(payload: QuestionnairePayload): string {
  const q = payload.questions;
  return [
    `<form class="questionnaire">`,
    sliderHtml("realism_most_preferred", q.realism_most.prompt, q.realism_most.scale,
               q.realism_most.anchors, q.realism_most.stimulus_id),
    sliderHtml("realism_least_preferred", q.realism_least.prompt, q.realism_least.scale,
               q.realism_least.anchors, q.realism_least.stimulus_id),
    sliderHtml("confidence", q.confidence.prompt, q.confidence.scale,
               q.confidence.anchors),
    `<button type="submit">Finish</button>`,
    `</form>`,
  ].join("");
}

export function readQuestionnaireForm(
  values: { realism_most_preferred: number; realism_least_preferred: number; confidence: number },
  payload: QuestionnairePayload,
): QuestionnaireBody {
  return {
    realism_most_preferred: clampToScale(
      values.realism_most_preferred, payload.questions.realism_most.scale),
    realism_least_preferred: clampToScale(
      values.realism_least_preferred, payload.questions.realism_least.scale),
    confidence: clampToScale(values.confidence, payload.questions.confidence.scale),
  };
}
