/**
 * Page wiring: boot from ?session=<id>, render the server's current
 * payload, and loop choices until the questionnaire completes.
 */

import { SessionClient, isComparing } from "./client.js";
import { parseObj } from "./objparse.js";
import { questionnaireHtml, readQuestionnaireForm } from "./questionnaire.js";
import type { ComparingPayload, QuestionnairePayload, SessionPayload, StimulusPayload } from "./types.js";
import { MeshViewport, applyDrag, applyWheel, defaultOrbit, type OrbitState } from "./viewer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function loadMesh(url: string): Promise<ReturnType<typeof parseObj>> {
  const response = await fetch(url);
  if (!response.ok) throw new Error(`mesh load failed: ${url}`);
  return parseObj(await response.text());
}

function loadTexture(url: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const image = new Image();
    image.onload = () => resolve(image);
    image.onerror = () => reject(new Error(`texture load failed: ${url}`));
    image.src = url;
  });
}

class App {
  private client: SessionClient;
  private left: MeshViewport;
  private right: MeshViewport;
  private orbit: OrbitState = defaultOrbit();

  constructor(sessionId: string) {
    this.client = new SessionClient({ baseUrl: "", sessionId });
    this.left = new MeshViewport(el<HTMLCanvasElement>("left-canvas"));
    this.right = new MeshViewport(el<HTMLCanvasElement>("right-canvas"));
    this.attachControls();
  }

  private attachControls(): void {
    // one orbit state drives both panes: synchronized exploration
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    for (const id of ["left-canvas", "right-canvas"]) {
      const canvas = el<HTMLCanvasElement>(id);
      canvas.addEventListener("mousedown", (e) => {
        dragging = true;
        lastX = e.clientX;
        lastY = e.clientY;
      });
      canvas.addEventListener("wheel", (e) => {
        e.preventDefault();
        this.orbit = applyWheel(this.orbit, e.deltaY);
        this.renderBoth();
      });
    }
    window.addEventListener("mouseup", () => {
      dragging = false;
    });
    window.addEventListener("mousemove", (e) => {
      if (!dragging) return;
      this.orbit = applyDrag(this.orbit, e.clientX - lastX, e.clientY - lastY);
      lastX = e.clientX;
      lastY = e.clientY;
      this.renderBoth();
    });
  }

  private renderBoth(): void {
    this.left.render(this.orbit);
    this.right.render(this.orbit);
  }

  async run(): Promise<void> {
    let payload = await this.client.refresh();
    while (payload.phase === "comparing") {
      payload = await this.presentPair(payload);
    }
    if (payload.phase === "questionnaire") {
      payload = await this.questionnaire(payload);
    }
    this.completion();
  }

  private async loadSide(viewport: MeshViewport, stimulus: StimulusPayload): Promise<void> {
    for (;;) {
      try {
        const mesh = await loadMesh(stimulus.mesh_url);
        viewport.setMesh(mesh, stimulus.shading);
        if (stimulus.texture_url) {
          viewport.bindTexture(await loadTexture(stimulus.texture_url));
        }
        return;
      } catch (error) {
        // asset failure: offer a retry, no choice recordable meanwhile
        el("status").textContent = `${error}`;
        await new Promise<void>((resolve) => {
          const button = el<HTMLButtonElement>("retry");
          button.hidden = false;
          button.onclick = () => {
            button.hidden = true;
            resolve();
          };
        });
      }
    }
  }

  private presentPair(payload: ComparingPayload): Promise<SessionPayload> {
    el("prompt").textContent = payload.prompt;
    el("status").textContent = "";
    this.orbit = defaultOrbit();

    return new Promise((resolve) => {
      const ready = Promise.all([
        this.loadSide(this.left, payload.left),
        this.loadSide(this.right, payload.right),
      ]);
      ready.then(() => {
        this.renderBoth();
        // both meshes visible: the response-time clock starts now
        this.client.markRenderComplete();
        const pick = (chosenId: string) => {
          if (!this.client.canChoose) return;
          this.client.choose(chosenId).then(resolve, (error) => {
            el("status").textContent = `${error}`;
          });
        };
        el<HTMLButtonElement>("choose-left").onclick = () => pick(payload.left.stimulus_id);
        el<HTMLButtonElement>("choose-right").onclick = () => pick(payload.right.stimulus_id);
        el<HTMLCanvasElement>("left-canvas").ondblclick = () => pick(payload.left.stimulus_id);
        el<HTMLCanvasElement>("right-canvas").ondblclick = () => pick(payload.right.stimulus_id);
      });
    });
  }

  private questionnaire(payload: QuestionnairePayload): Promise<SessionPayload> {
    const host = el("questionnaire");
    host.innerHTML = questionnaireHtml(payload);
    host.hidden = false;
    el("comparison").hidden = true;
    for (const output of host.querySelectorAll("fieldset")) {
      const range = output.querySelector("input[type=range]") as HTMLInputElement;
      const display = output.querySelector("output") as HTMLOutputElement;
      range.oninput = () => {
        display.textContent = range.value;
      };
    }
    return new Promise((resolve) => {
      const form = host.querySelector("form") as HTMLFormElement;
      form.onsubmit = (event) => {
        event.preventDefault();
        const values = {
          realism_most_preferred: Number(
            (form.elements.namedItem("realism_most_preferred") as HTMLInputElement).value),
          realism_least_preferred: Number(
            (form.elements.namedItem("realism_least_preferred") as HTMLInputElement).value),
          confidence: Number(
            (form.elements.namedItem("confidence") as HTMLInputElement).value),
        };
        this.client
          .submitQuestionnaire(readQuestionnaireForm(values, payload))
          .then(resolve, (error) => {
            el("status").textContent = `${error}`;
          });
      };
    });
  }

  private completion(): void {
    el("questionnaire").hidden = true;
    el("comparison").hidden = true;
    el("complete").hidden = false;
  }
}

const sessionId = new URLSearchParams(window.location.search).get("session");
if (sessionId) {
  new App(sessionId).run().catch((error) => {
    el("status").textContent = `${error}`;
  });
} else {
  el("status").textContent = "missing ?session=<id> in the URL";
}
