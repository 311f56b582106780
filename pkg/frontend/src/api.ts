// Typed client over the portal and admin HTTP APIs. Every method is exactly
// one request; the fetch implementation is injectable so tests can stub it
// or wrap it with a cookie jar.

import type {
  AlertResult,
  AwarenessForm,
  CustomizationForm,
  Discipline,
  AdminLibrarian,
  AdminResource,
  MassEmailReport,
  PageDocument,
  ProfileItem,
  UsageReport,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class NotAuthenticated extends Error {
  constructor() {
    super("not authenticated");
  }
}

export type LoginOutcome =
  | { kind: "page"; page: PageDocument }
  | { kind: "entry"; hint: string };

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    private base: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  // ---- session -----------------------------------------------------------

  async login(params: Record<string, string>): Promise<LoginOutcome> {
    const query = new URLSearchParams(params).toString();
    const data = await this.request<Record<string, unknown>>(
      "GET",
      `/login${query ? "?" + query : ""}`,
    );
    if (Array.isArray((data as { sections?: unknown }).sections)) {
      return { kind: "page", page: data as unknown as PageDocument };
    }
    return { kind: "entry", hint: String(data.hint ?? "") };
  }

  async fetchPage(): Promise<PageDocument> {
    const data = await this.request<Record<string, unknown>>("GET", "/page");
    if (!Array.isArray((data as { sections?: unknown }).sections)) {
      // an unauthenticated request lands on the authenticator document
      throw new NotAuthenticated();
    }
    return data as unknown as PageDocument;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/logout");
  }

  // ---- customization -----------------------------------------------------

  getCustomizationForm(section: string): Promise<CustomizationForm> {
    return this.request("GET", `/customize/${section}`);
  }

  getAwarenessForm(): Promise<AwarenessForm> {
    return this.request("GET", "/customize/current_awareness");
  }

  submitCustomization(section: string, checkedIds: string[]): Promise<PageDocument> {
    return this.request("POST", `/customize/${section}`, { resource_ids: checkedIds });
  }

  // ---- personal links, discipline, quick search ---------------------------

  addPersonalLink(title: string, url: string): Promise<{ id: string }> {
    return this.request("POST", "/personal-links", { title, url });
  }

  async deletePersonalLink(id: string): Promise<void> {
    await this.request("DELETE", `/personal-links/${id}`);
  }

  setDiscipline(disciplineId: string): Promise<PageDocument> {
    return this.request("POST", "/discipline", { discipline_id: disciplineId });
  }

  quickSearchUrl(engineId: string, query: string): string {
    const params = new URLSearchParams({ engine: engineId, q: query });
    return `${this.base}/quick-search?${params.toString()}`;
  }

  // ---- current-awareness profiles ----------------------------------------

  async listProfiles(): Promise<ProfileItem[]> {
    const data = await this.request<{ profiles: ProfileItem[] }>("GET", "/profiles");
    return data.profiles;
  }

  saveProfile(ranges: string, delivery: string): Promise<ProfileItem> {
    return this.request("POST", "/profiles", { ranges, delivery });
  }

  async deleteProfile(id: string): Promise<void> {
    await this.request("DELETE", `/profiles/${id}`);
  }

  profileResults(id: string, fromWeeksAgo: number, toWeeksAgo: number): Promise<AlertResult> {
    return this.request(
      "GET",
      `/profiles/${id}/results?from_weeks_ago=${fromWeeksAgo}&to_weeks_ago=${toWeeksAgo}`,
    );
  }

  // ---- admin ---------------------------------------------------------------

  async adminLogin(username: string, password: string): Promise<boolean> {
    try {
      await this.request("POST", "/admin/login", { username, password });
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) return false;
      throw err;
    }
  }

  async adminList(kind: "disciplines"): Promise<Discipline[]>;
  async adminList(kind: "librarians"): Promise<AdminLibrarian[]>;
  async adminList(kind: "resources"): Promise<AdminResource[]>;
  async adminList(kind: string): Promise<unknown[]> {
    const data = await this.request<Record<string, unknown[]>>("GET", `/admin/${kind}`);
    return data[kind] ?? [];
  }

  adminUpsert(kind: string, payload: Record<string, unknown>): Promise<Record<string, unknown>> {
    return this.request("POST", `/admin/${kind}`, payload);
  }

  adminDelete(kind: string, id: string): Promise<Record<string, unknown>> {
    return this.request("DELETE", `/admin/${kind}/${id}`);
  }

  adminGetRecommendations(disciplineId: string, section: string): Promise<{ resource_ids: string[] }> {
    return this.request(
      "GET",
      `/admin/recommendations?discipline_id=${disciplineId}&section=${section}`,
    );
  }

  adminSetRecommendations(
    disciplineId: string,
    section: string,
    resourceIds: string[],
  ): Promise<Record<string, unknown>> {
    return this.request("POST", "/admin/recommendations", {
      discipline_id: disciplineId,
      section,
      resource_ids: resourceIds,
    });
  }

  adminSetGlobalMessage(body: string): Promise<Record<string, unknown>> {
    return this.request("POST", "/admin/messages/global", { body });
  }

  adminSetDisciplineMessage(disciplineId: string, body: string): Promise<Record<string, unknown>> {
    return this.request("POST", `/admin/messages/discipline/${disciplineId}`, { body });
  }

  adminMassEmail(disciplineIds: string[], subject: string, body: string): Promise<MassEmailReport> {
    return this.request("POST", "/admin/mass-email", {
      discipline_ids: disciplineIds,
      subject,
      body,
    });
  }

  adminUsageReport(from?: string, to?: string): Promise<UsageReport> {
    const params = new URLSearchParams();
    if (from) params.set("from", from);
    if (to) params.set("to", to);
    const query = params.toString();
    return this.request("GET", `/admin/reports${query ? "?" + query : ""}`);
  }

  // ---- plumbing -------------------------------------------------------------

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, credentials: "same-origin" };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (response.status === 302 || response.status === 401) {
      throw response.status === 401 && path.startsWith("/admin")
        ? new ApiError(401, await errorText(response))
        : new NotAuthenticated();
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorText(response));
    }
    return (await response.json()) as T;
  }
}

async function errorText(response: Response): Promise<string> {
  try {
    const data = (await response.json()) as { error?: string };
    return data.error ?? `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}
