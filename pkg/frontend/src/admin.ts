// Admin console wiring. Each mutation is exactly one API call; every
// view re-reads from the server afterwards, so what is shown is always
// the server's state.

import { ApiClient, ApiError } from "./api.js";
import {
  renderAdminLogin,
  renderAdminShell,
  renderDisciplines,
  renderLibrarians,
  renderMassEmail,
  renderMessages,
  renderResources,
  renderUsageReport,
} from "./admin_render.js";
import { renderBanner } from "./render.js";
import type { MassEmailReport } from "./types.js";

type Tab = "disciplines" | "librarians" | "resources" | "messages" | "mass-email" | "reports";

export class AdminApp {
  private authed = false;
  private tab: Tab = "disciplines";
  private banner = "";
  private lastMassEmail?: MassEmailReport;

  constructor(
    private root: HTMLElement,
    private api: ApiClient = new ApiClient(),
  ) {}

  async start(): Promise<void> {
    await this.refresh();
    this.root.addEventListener("click", (event) => void this.onClick(event));
    this.root.addEventListener("submit", (event) => void this.onSubmit(event));
  }

  private async refresh(): Promise<void> {
    if (!this.authed) {
      this.root.innerHTML = (this.banner ? renderBanner(this.banner) : "") + renderAdminLogin();
      return;
    }
    let content: string;
    try {
      content = await this.tabContent();
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.authed = false;
        await this.refresh();
        return;
      }
      content = renderBanner(String(err));
    }
    this.root.innerHTML =
      (this.banner ? renderBanner(this.banner) : "") + renderAdminShell(content);
  }

  private async tabContent(): Promise<string> {
    switch (this.tab) {
      case "disciplines":
        return renderDisciplines(await this.api.adminList("disciplines"));
      case "librarians":
        return renderLibrarians(
          await this.api.adminList("librarians"),
          await this.api.adminList("disciplines"),
        );
      case "resources":
        return renderResources(
          await this.api.adminList("resources"),
          await this.api.adminList("disciplines"),
        );
      case "messages":
        return renderMessages(await this.api.adminList("disciplines"));
      case "mass-email":
        return renderMassEmail(await this.api.adminList("disciplines"), this.lastMassEmail);
      case "reports":
        return renderUsageReport(await this.api.adminUsageReport());
    }
  }

  private async onClick(event: Event): Promise<void> {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    event.preventDefault();
    this.banner = "";
    try {
      if (target.dataset.action === "tab") {
        this.tab = (target.dataset.tab ?? "disciplines") as Tab;
      } else if (target.dataset.action === "delete") {
        await this.api.adminDelete(target.dataset.kind ?? "", target.dataset.id ?? "");
      }
      await this.refresh();
    } catch (err) {
      this.banner = String(err instanceof ApiError ? err.message : err);
      await this.refresh();
    }
  }

  private async onSubmit(event: Event): Promise<void> {
    const form = event.target as HTMLFormElement;
    const kind = form.dataset.form;
    if (!kind) return;
    event.preventDefault();
    const data = new FormData(form);
    const text = (name: string) => String(data.get(name) ?? "").trim();
    this.banner = "";
    try {
      switch (kind) {
        case "admin-login": {
          const ok = await this.api.adminLogin(text("username"), text("password"));
          if (!ok) this.banner = "Rejected.";
          this.authed = ok;
          break;
        }
        case "upsert-discipline":
          await this.api.adminUpsert("disciplines", {
            name: text("name"),
            description: text("description"),
          });
          break;
        case "upsert-librarian":
          await this.api.adminUpsert("librarians", {
            name: text("name"),
            phone: text("phone"),
            email: text("email"),
            role: text("role"),
            discipline_ids: [text("discipline_id")],
          });
          break;
        case "upsert-resource": {
          const payload: Record<string, unknown> = {
            kind: text("kind"),
            title: text("title"),
            url: text("url"),
            discipline_ids: [text("discipline_id")],
          };
          if (text("url_template")) payload.url_template = text("url_template");
          await this.api.adminUpsert("resources", payload);
          break;
        }
        case "global-message":
          await this.api.adminSetGlobalMessage(text("body"));
          this.banner = "Published.";
          break;
        case "discipline-message":
          await this.api.adminSetDisciplineMessage(text("discipline_id"), text("body"));
          this.banner = "Published.";
          break;
        case "mass-email": {
          const ids = data.getAll("discipline_ids").map(String);
          this.lastMassEmail = await this.api.adminMassEmail(ids, text("subject"), text("body"));
          break;
        }
        case "report-period":
          break; // refresh below re-reads with the form's dates
      }
      await this.refresh();
    } catch (err) {
      this.banner = String(err instanceof ApiError ? err.message : err);
      await this.refresh();
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("admin")) {
  void new AdminApp(document.getElementById("admin") as HTMLElement).start();
}
