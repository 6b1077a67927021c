/** Bootstrap: fetch the next task, drive the view, submit, repeat. */

import { fetchNextTask, submitResponse, VersionConflictError } from "./api.js";
import { newSession, Session } from "./state.js";
import { AnnotationView } from "./view.js";

function coderId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("coder");
  if (fromQuery) {
    return fromQuery;
  }
  const stored = window.localStorage.getItem("coder_id");
  if (stored) {
    return stored;
  }
  const entered = window.prompt("Coder id:") ?? "";
  window.localStorage.setItem("coder_id", entered);
  return entered;
}

export async function start(root: HTMLElement): Promise<void> {
  const coder = coderId();
  const base = window.location.origin;

  async function loadNext(): Promise<void> {
    const assignment = await fetchNextTask(base, coder);
    if (assignment === null) {
      root.replaceChildren();
      const done = document.createElement("p");
      done.className = "all-done";
      done.textContent = "All tasks submitted. Thank you!";
      root.append(done);
      return;
    }
    const session: Session = newSession(assignment.task, assignment.version);
    const view = new AnnotationView(root, session, {
      onSubmit: async (payload) => {
        try {
          await submitResponse(
            base, assignment.task.task_id, coder, session.version, payload);
          await loadNext();
        } catch (error) {
          if (error instanceof VersionConflictError) {
            view.showConflict();
          } else {
            throw error;
          }
        }
      },
    });
    view.render();
    window.addEventListener("keydown", (event) => {
      if ((event.target as HTMLElement)?.tagName !== "TEXTAREA") {
        view.handleKey(event.key);
      }
    });
  }

  await loadNext();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void start(document.getElementById("app") as HTMLElement);
}
