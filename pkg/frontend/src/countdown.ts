// Hold-expiry countdown. The confirm button stays enabled only while the
// ticket is live; once remaining hits zero the flow must re-pick a slot.

export class HoldCountdown {
  private readonly expiresAtMs: number;

  constructor(expiresAt: string, private readonly clock: () => number = Date.now) {
    this.expiresAtMs = Date.parse(expiresAt);
  }

  remainingSeconds(now?: number): number {
    const at = now ?? this.clock();
    return Math.max(0, Math.floor((this.expiresAtMs - at) / 1000));
  }

  expired(now?: number): boolean {
    return this.remainingSeconds(now) === 0;
  }

  confirmEnabled(now?: number): boolean {
    return !this.expired(now);
  }
}
