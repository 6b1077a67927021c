/** DOM rendering for the annotation session.
 *
 * Token-click selection only: the data model is head-based, so tokens are the
 * only unit an annotator can mark. Keyboard shortcuts: 1-5 set the rating,
 * "n" maps the active markable to NONE.
 */

import {
  Session,
  buildResponse,
  canSubmit,
  isAddressed,
  markableKeys,
  markingRequired,
  setEditedText,
  setNone,
  setQuality,
  toggleFlag,
  toggleToken,
  unaddressedKeys,
} from "./state.js";
import { ResponsePayload, SPECIAL_FLAGS, SpecialFlag, Task } from "./types.js";

export interface ViewCallbacks {
  onSubmit: (payload: ResponsePayload) => void;
}

interface MarkableDescriptor {
  key: string;
  label: string;
  sourceIndices: number[];
}

function describeMarkables(task: Task): MarkableDescriptor[] {
  const out: MarkableDescriptor[] = [];
  task.predicates.forEach((pred, pos) => {
    out.push({
      key: `pred:${pos}`,
      label: `predicate ${pred.sense}`,
      sourceIndices: [pred.source_index],
    });
    for (const arg of pred.arguments) {
      out.push({
        key: `arg:${pos}:${arg.source_index}`,
        label: `${arg.role} of ${pred.sense}`,
        sourceIndices: [arg.source_index],
      });
    }
  });
  return out;
}

export class AnnotationView {
  private active: string | null = null;

  constructor(
    private root: HTMLElement,
    private session: Session,
    private callbacks: ViewCallbacks,
  ) {
    this.active = markableKeys(session.task)[0] ?? null;
  }

  handleKey(key: string): void {
    if (/^[1-5]$/.test(key)) {
      setQuality(this.session, Number(key));
      this.render();
    } else if (key.toLowerCase() === "n" && this.active !== null
               && markingRequired(this.session)) {
      setNone(this.session, this.active);
      this.render();
    }
  }

  showConflict(): void {
    const banner = this.root.querySelector(".conflict-banner") as HTMLElement;
    banner.hidden = false;
  }

  render(): void {
    const session = this.session;
    this.root.replaceChildren();

    const banner = el("div", "conflict-banner");
    banner.hidden = true;
    banner.textContent =
      "Someone else updated this assignment. Reload to continue; " +
      "your markings are kept.";
    this.root.append(banner);

    const sentence = el("p", "source-sentence");
    sentence.textContent = session.task.source_tokens.join(" ");
    this.root.append(h2("Translation"), sentence);

    const target = el("p", "target-sentence");
    target.textContent = session.task.target_text;
    this.root.append(target);

    this.root.append(h2("Quality (1 worst - 5 best)"));
    const rating = el("div", "rating");
    for (let value = 1; value <= 5; value++) {
      const button = el("button", "rating-button") as HTMLButtonElement;
      button.textContent = String(value);
      button.dataset.value = String(value);
      if (session.quality === value) {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => {
        setQuality(session, value);
        this.render();
      });
      rating.append(button);
    }
    this.root.append(rating);

    if (markingRequired(session)) {
      this.root.append(h2("Mark the matching target words"));
      this.root.append(this.renderMarkables());
      const edit = el("textarea", "edited-text") as HTMLTextAreaElement;
      edit.placeholder = "Optional: fix minor translation mistakes";
      edit.value = session.editedText ?? "";
      edit.addEventListener("input", () => setEditedText(session, edit.value));
      this.root.append(h2("Translation fix"), edit);
    }

    const problems = el("p", "validation-message");
    const missing = unaddressedKeys(session);
    if (session.quality === null) {
      problems.textContent = "Rate the translation first.";
    } else if (missing.length > 0) {
      problems.textContent =
        `Address every item before submitting (${missing.length} left).`;
    } else {
      problems.textContent = "";
    }
    this.root.append(problems);

    const submit = el("button", "submit-button") as HTMLButtonElement;
    submit.textContent = "Submit";
    submit.disabled = !canSubmit(session);
    submit.addEventListener("click", () => {
      if (!canSubmit(session)) {
        return;
      }
      this.callbacks.onSubmit(buildResponse(session));
    });
    this.root.append(submit);
  }

  private renderMarkables(): HTMLElement {
    const session = this.session;
    const list = el("div", "markables");
    for (const info of describeMarkables(session.task)) {
      const state = session.markables.get(info.key);
      if (!state) {
        continue;
      }
      const box = el("fieldset", "markable");
      box.dataset.key = info.key;
      if (this.active === info.key) {
        box.classList.add("active");
      }
      box.addEventListener("click", () => {
        this.active = info.key;
      });

      const legend = el("legend", "markable-label");
      const sourceWords = info.sourceIndices
        .map((i) => session.task.source_tokens[i - 1])
        .join(" ");
      legend.textContent = `${info.label}: "${sourceWords}"`;
      if (isAddressed(state)) {
        legend.classList.add("addressed");
      }
      box.append(legend);

      const tokens = el("div", "target-tokens");
      session.task.target_tokens.forEach((form, position) => {
        const index = position + 1;
        const chip = el("button", "token") as HTMLButtonElement;
        chip.textContent = form;
        chip.dataset.index = String(index);
        if (state.selection.includes(index)) {
          chip.classList.add("selected");
        }
        chip.addEventListener("click", (event) => {
          event.stopPropagation();
          this.active = info.key;
          toggleToken(session, info.key, index);
          this.render();
        });
        tokens.append(chip);
      });
      box.append(tokens);

      const none = el("button", "none-button") as HTMLButtonElement;
      none.textContent = "NONE";
      if (state.none) {
        none.classList.add("selected");
      }
      none.addEventListener("click", (event) => {
        event.stopPropagation();
        this.active = info.key;
        setNone(session, info.key);
        this.render();
      });
      box.append(none);

      const flags = el("div", "flags");
      for (const flag of SPECIAL_FLAGS) {
        const label = el("label", "flag");
        const input = el("input") as HTMLInputElement;
        input.type = "checkbox";
        input.dataset.flag = flag;
        input.checked = state.flags.includes(flag as SpecialFlag);
        input.addEventListener("change", () => {
          toggleFlag(session, info.key, flag as SpecialFlag);
        });
        label.append(input, document.createTextNode(flag));
        flags.append(label);
      }
      box.append(flags);
      list.append(box);
    }
    return list;
  }
}

function el(tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  return node;
}

function h2(text: string): HTMLElement {
  const node = el("h2");
  node.textContent = text;
  return node;
}
