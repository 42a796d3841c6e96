import { describe, expect, it } from "vitest";

import { SLOT_CACHE_FRESH_MS, ViewStore } from "../src/state";
import type { SessionView, SlotView } from "../src/types";

const SESSION: SessionView = { token: "tok", role: "patient", account_id: "p1", doctor_id: null };

const SLOT: SlotView = {
  slot_id: "d1:2026081708:0",
  doctor_id: "d1",
  start: "2026-08-17T08:00:00+00:00",
  date: "2026-08-17",
  time: "08:00",
  duration_minutes: 10,
  state: "available",
  hour_position: 0,
};

describe("ViewStore", () => {
  it("refuses authenticated screens without a session", () => {
    const store = new ViewStore();
    expect(store.navigate("welcome")).toBe("login");
    expect(store.navigate("inbox")).toBe("login");
    expect(store.currentScreen).toBe("login");
  });

  it("routes by role after login and locks down after logout", () => {
    const store = new ViewStore();
    store.startSession(SESSION);
    expect(store.currentScreen).toBe("welcome");
    expect(store.navigate("by_specialty")).toBe("by_specialty");

    store.endSession();
    expect(store.currentScreen).toBe("login");
    expect(store.navigate("history")).toBe("login");

    store.startSession({ ...SESSION, role: "doctor", doctor_id: "d1" });
    expect(store.currentScreen).toBe("doctor_panel");
  });

  it("notifies subscribers on navigation", () => {
    const store = new ViewStore();
    const seen: string[] = [];
    const unsubscribe = store.subscribe((screen) => seen.push(screen));
    store.startSession(SESSION);
    store.navigate("by_day");
    unsubscribe();
    store.navigate("inbox");
    expect(seen).toEqual(["welcome", "by_day"]);
  });

  it("tracks slot-cache freshness against the re-fetch window", () => {
    const store = new ViewStore();
    const t0 = 1_000_000;
    store.cacheSlots("d1:2026-08-17", [SLOT], t0);
    expect(store.isFresh("d1:2026-08-17", t0 + 1_000)).toBe(true);
    expect(store.isFresh("d1:2026-08-17", t0 + SLOT_CACHE_FRESH_MS + 1)).toBe(false);
    expect(store.isFresh("unknown-key", t0)).toBe(false);
    expect(store.cachedSlots("d1:2026-08-17")?.slots).toEqual([SLOT]);

    store.dropSlots("d1:2026-08-17");
    expect(store.cachedSlots("d1:2026-08-17")).toBeUndefined();
  });

  it("clears cached slots when the session ends", () => {
    const store = new ViewStore();
    store.startSession(SESSION);
    store.cacheSlots("k", [SLOT], 0);
    store.endSession();
    expect(store.cachedSlots("k")).toBeUndefined();
  });
});
