// Screen/session store. Two invariants live here: no authenticated screen is
// reachable without a token, and slot lists older than the freshness window
// must be re-fetched before anything is confirmed against them.

import type { SessionView, SlotView } from "./types";

export type Screen =
  | "login"
  | "welcome"
  | "by_day"
  | "by_specialty"
  | "confirm"
  | "history"
  | "doctor_panel"
  | "inbox";

const PUBLIC_SCREENS: ReadonlySet<Screen> = new Set<Screen>(["login"]);

export const SLOT_CACHE_FRESH_MS = 15_000;

export interface CachedSlots {
  key: string;
  slots: SlotView[];
  fetchedAt: number;
}

export class ViewStore {
  private session: SessionView | null = null;
  private screen: Screen = "login";
  private slotCache = new Map<string, CachedSlots>();
  private listeners = new Set<(screen: Screen) => void>();

  get currentScreen(): Screen {
    return this.screen;
  }

  get currentSession(): SessionView | null {
    return this.session;
  }

  get authenticated(): boolean {
    return this.session !== null;
  }

  subscribe(listener: (screen: Screen) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit() {
    this.listeners.forEach((listener) => listener(this.screen));
  }

  startSession(session: SessionView) {
    this.session = session;
    this.navigate(session.role === "doctor" ? "doctor_panel" : "welcome");
  }

  endSession() {
    this.session = null;
    this.slotCache.clear();
    this.screen = "login";
    this.emit();
  }

  /** Move between screens; unauthenticated navigation lands on login. */
  navigate(target: Screen): Screen {
    if (!this.session && !PUBLIC_SCREENS.has(target)) {
      this.screen = "login";
    } else {
      this.screen = target;
    }
    this.emit();
    return this.screen;
  }

  // -- slot cache -----------------------------------------------------------

  cacheSlots(key: string, slots: SlotView[], now: number) {
    this.slotCache.set(key, { key, slots, fetchedAt: now });
  }

  cachedSlots(key: string): CachedSlots | undefined {
    return this.slotCache.get(key);
  }

  /** Stale lists must be re-fetched before a hold/confirm is attempted. */
  isFresh(key: string, now: number, maxAgeMs: number = SLOT_CACHE_FRESH_MS): boolean {
    const cached = this.slotCache.get(key);
    return cached !== undefined && now - cached.fetchedAt <= maxAgeMs;
  }

  dropSlots(key: string) {
    this.slotCache.delete(key);
  }
}
