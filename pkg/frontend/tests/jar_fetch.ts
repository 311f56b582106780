// A fetch wrapper with a cookie jar and browser-like redirect following,
// so the client behaves in node the way it does in a browser.

import type { FetchLike } from "../src/api.js";

export function makeJarFetch(): FetchLike {
  const jar = new Map<string, string>();

  return async (url: string, init: RequestInit = {}): Promise<Response> => {
    let current = url;
    let method = init.method ?? "GET";
    let body = init.body;
    let extraHeaders = init.headers;

    for (let hop = 0; hop < 8; hop++) {
      const headers = new Headers(extraHeaders);
      if (jar.size > 0) {
        headers.set("cookie", [...jar].map(([k, v]) => `${k}=${v}`).join("; "));
      }
      const response = await fetch(current, { method, headers, body, redirect: "manual" });

      for (const line of response.headers.getSetCookie()) {
        const [pair, ...attrs] = line.split(";");
        const eq = (pair ?? "").indexOf("=");
        if (eq < 0) continue;
        const name = pair!.slice(0, eq).trim();
        const value = pair!.slice(eq + 1).trim().replace(/^"|"$/g, "");
        const expired = attrs.some((a) => /max-age=0/i.test(a.trim()));
        if (!value || expired) jar.delete(name);
        else jar.set(name, value);
      }

      if ([301, 302, 303, 307, 308].includes(response.status)) {
        const location = response.headers.get("location");
        if (location) {
          current = new URL(location, current).toString();
          if (response.status === 303 || response.status === 302 || response.status === 301) {
            method = "GET";
            body = undefined;
            extraHeaders = undefined;
          }
          continue;
        }
      }
      return response;
    }
    throw new Error("too many redirects");
  };
}
