/** Wire types for the session API; field names mirror the server JSON. */

export type ShadingMode = "unlit" | "lambert";

export interface StimulusPayload {
  stimulus_id: string;
  mesh_url: string;
  texture_url: string | null;
  shading: ShadingMode;
}

export interface ComparingPayload {
  phase: "comparing";
  session_id: string;
  presentation_id: string;
  sequence_index: number;
  prompt: string;
  left: StimulusPayload;
  right: StimulusPayload;
}

export interface QuestionPayload {
  prompt: string;
  stimulus_id?: string;
  scale: [number, number];
  anchors?: Record<string, string>;
}

export interface QuestionnairePayload {
  phase: "questionnaire";
  session_id: string;
  questions: {
    realism_most: QuestionPayload;
    realism_least: QuestionPayload;
    confidence: QuestionPayload;
  };
  tie_most: boolean;
  tie_least: boolean;
}

export interface CompletePayload {
  phase: "complete";
  session_id: string;
}

export type SessionPayload = ComparingPayload | QuestionnairePayload | CompletePayload;

export interface ChoiceBody {
  presentation_id: string;
  chosen_id: string;
  response_time: number;
}

export interface QuestionnaireBody {
  realism_most_preferred: number;
  realism_least_preferred: number;
  confidence: number;
}
