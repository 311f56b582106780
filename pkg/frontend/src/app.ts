// Browser wiring for the portal page. State is whatever the server last
// sent; every user action is one API call followed by a re-render.

import { ApiClient, ApiError, NotAuthenticated } from "./api.js";
import {
  renderAlertResult,
  renderAwarenessCustomize,
  renderBanner,
  renderCustomizeForm,
  renderEntryView,
  renderErrorView,
  renderPage,
} from "./render.js";
import type { PageDocument } from "./types.js";

type View =
  | { name: "entry"; hint?: string }
  | { name: "page"; doc: PageDocument }
  | { name: "customize"; doc: PageDocument; html: string }
  | { name: "error"; message: string };

export class App {
  private view: View = { name: "entry" };
  private banner = "";
  private results = "";

  constructor(
    private root: HTMLElement,
    private api: ApiClient = new ApiClient(),
  ) {}

  async start(): Promise<void> {
    try {
      const doc = await this.api.fetchPage();
      this.view = { name: "page", doc };
    } catch (err) {
      this.view =
        err instanceof NotAuthenticated
          ? { name: "entry" }
          : { name: "error", message: String(err) };
    }
    this.render();
    this.root.addEventListener("click", (event) => void this.onClick(event));
    this.root.addEventListener("submit", (event) => void this.onSubmit(event));
  }

  private render(): void {
    let html: string;
    switch (this.view.name) {
      case "entry":
        html = renderEntryView(this.view.hint ?? "");
        break;
      case "page":
        try {
          html = renderPage(this.view.doc);
        } catch (err) {
          html = renderErrorView(String(err));
        }
        break;
      case "customize":
        html = this.view.html;
        break;
      case "error":
        html = renderErrorView(this.view.message);
        break;
    }
    this.root.innerHTML = (this.banner ? renderBanner(this.banner) : "") + html + this.results;
  }

  private showPage(doc: PageDocument): void {
    this.view = { name: "page", doc };
    this.banner = "";
    this.results = "";
    this.render();
  }

  private fail(err: unknown): void {
    // keep the current view; surface the problem in a banner
    this.banner = err instanceof ApiError ? err.message : String(err);
    this.render();
  }

  private async onClick(event: Event): Promise<void> {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    event.preventDefault();
    const action = target.dataset.action;
    const id = target.dataset.id ?? "";
    try {
      switch (action) {
        case "logout": {
          await this.api.logout();
          this.view = { name: "entry" };
          this.banner = "";
          this.results = "";
          this.render();
          break;
        }
        case "customize": {
          const section = target.dataset.section ?? "";
          if (this.view.name !== "page" && this.view.name !== "customize") return;
          const doc = this.view.doc;
          const html =
            section === "current_awareness"
              ? renderAwarenessCustomize(await this.api.getAwarenessForm())
              : renderCustomizeForm(await this.api.getCustomizationForm(section));
          this.view = { name: "customize", doc, html };
          this.render();
          break;
        }
        case "cancel": {
          const doc = await this.api.fetchPage();
          this.showPage(doc);
          break;
        }
        case "delete-personal-link": {
          await this.api.deletePersonalLink(id);
          this.showPage(await this.api.fetchPage());
          break;
        }
        case "delete-profile": {
          await this.api.deleteProfile(id);
          this.showPage(await this.api.fetchPage());
          break;
        }
        case "ca-query": {
          const from = this.numberInput("from_weeks_ago", 2);
          const to = this.numberInput("to_weeks_ago", 0);
          const result = await this.api.profileResults(id, from, to);
          this.results = renderAlertResult(result);
          this.render();
          break;
        }
      }
    } catch (err) {
      if (err instanceof NotAuthenticated) {
        this.view = { name: "entry" };
        this.render();
        return;
      }
      this.fail(err);
    }
  }

  private async onSubmit(event: Event): Promise<void> {
    const form = event.target as HTMLFormElement;
    const kind = form.dataset.form;
    if (!kind) return;
    event.preventDefault();
    const data = new FormData(form);
    try {
      switch (kind) {
        case "login": {
          const params: Record<string, string> = {};
          for (const key of ["auth_id", "name", "email", "discipline"]) {
            const value = String(data.get(key) ?? "").trim();
            if (value) params[key] = value;
          }
          const outcome = await this.api.login(params);
          if (outcome.kind === "page") this.showPage(outcome.page);
          else this.fail(new Error("login did not establish a session"));
          break;
        }
        case "customize": {
          const section = form.dataset.section ?? "";
          const checked = data.getAll("resource").map(String);
          const doc = await this.api.submitCustomization(section, checked);
          this.showPage(doc);
          break;
        }
        case "add-personal-link": {
          await this.api.addPersonalLink(
            String(data.get("title") ?? ""),
            String(data.get("url") ?? ""),
          );
          this.showPage(await this.api.fetchPage());
          break;
        }
        case "save-profile": {
          await this.api.saveProfile(
            String(data.get("ranges") ?? ""),
            String(data.get("delivery") ?? "screen"),
          );
          this.showPage(await this.api.fetchPage());
          break;
        }
        case "quick-search": {
          const engine = String(data.get("engine") ?? "");
          const query = String(data.get("q") ?? "");
          window.location.href = this.api.quickSearchUrl(engine, query);
          break;
        }
      }
    } catch (err) {
      if (err instanceof NotAuthenticated) {
        this.view = { name: "entry" };
        this.render();
        return;
      }
      this.fail(err); // form stays rendered; the banner reports the failure
    }
  }

  private numberInput(name: string, fallback: number): number {
    const input = this.root.querySelector<HTMLInputElement>(`[name="${name}"]`);
    const value = input ? parseInt(input.value, 10) : NaN;
    return Number.isFinite(value) ? value : fallback;
  }
}

declare global {
  interface Window {
    __libportalApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(document.getElementById("app") as HTMLElement);
  window.__libportalApp = app;
  void app.start();
}
