// Browser wiring: join or resume a session, render one decision at a time,
// and keep the judge token in localStorage so closing the tab never loses
// progress. Network failures keep the current pair on screen with a retry
// prompt; the per-presentation token makes the retry idempotent.

import { ApiClient } from "./api.js";
import { renderPairScreen } from "./render.js";
import { JudgeSession } from "./session.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
const api = new ApiClient(baseUrl);

const root = document.getElementById("app")!;

function storageKey(studyId: string): string {
  return `tiebt-judge:${studyId}`;
}

function renderError(message: string, retry: () => void): void {
  const banner = document.createElement("p");
  banner.className = "error";
  banner.textContent = `${message} `;
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.addEventListener("click", () => {
    banner.remove();
    retry();
  });
  banner.appendChild(button);
  root.prepend(banner);
}

function renderSession(session: JudgeSession): void {
  root.innerHTML = renderPairScreen(session.view);
  for (const button of root.querySelectorAll<HTMLButtonElement>("[data-action]")) {
    button.addEventListener("click", () => submit(session, button.dataset.action!));
  }
}

function setButtonsDisabled(disabled: boolean): void {
  for (const button of root.querySelectorAll<HTMLButtonElement>("[data-action]")) {
    button.disabled = disabled;
  }
}

async function submit(session: JudgeSession, action: string): Promise<void> {
  if (session.submitting) return;
  setButtonsDisabled(true);
  try {
    await session.submit(action as "left" | "right" | "tie" | "skip");
    renderSession(session);
  } catch (err) {
    setButtonsDisabled(false);
    renderError(
      `Could not record the judgement (${(err as Error).message}).`,
      () => submit(session, action),
    );
  }
}

function renderJoinForm(studyId: string): void {
  root.innerHTML = `
    <h1>Ward comparison study</h1>
    <p>Enter the regions you know well, separated by commas.</p>
    <form id="join">
      <input name="regions" placeholder="e.g. Ashworth, Brindle" required />
      <button type="submit">Start judging</button>
    </form>`;
  const form = document.getElementById("join") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const raw = new FormData(form).get("regions") as string;
    const regions = raw
      .split(",")
      .map((r) => r.trim())
      .filter((r) => r.length > 0);
    try {
      const session = await JudgeSession.join(api, studyId, regions);
      localStorage.setItem(storageKey(studyId), session.token);
      renderSession(session);
    } catch (err) {
      renderError(`Could not join (${(err as Error).message}).`, () =>
        renderJoinForm(studyId),
      );
    }
  });
}

async function start(): Promise<void> {
  const studyId = params.get("study");
  if (!studyId) {
    root.innerHTML = `<p class="error">Missing ?study=... in the URL.</p>`;
    return;
  }
  const stored = localStorage.getItem(storageKey(studyId));
  if (stored) {
    try {
      const session = await JudgeSession.resume(api, studyId, stored);
      renderSession(session);
      return;
    } catch {
      localStorage.removeItem(storageKey(studyId));
    }
  }
  renderJoinForm(studyId);
}

start().catch((err) => {
  root.innerHTML = `<p class="error">Failed to start: ${(err as Error).message}</p>`;
});
