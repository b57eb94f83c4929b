/**
 * Live session state, headless. All outcome classification comes from
 * server acks; this side only measures timestamps, hit-tests clicks
 * against the current layout, and mirrors what the service says.
 */

import { ApiClient, EventAck, FinalizeResponse, GameEvent, SessionTicket, Tally } from "./api.js";
import { LevelDefinition, levelAt } from "./level.js";
import { PlacedObject, placeObjects } from "./placement.js";

export type SessionPhase = "idle" | "briefing" | "in-trial" | "ended";

export interface ClientSessionView {
  ticket: SessionTicket;
  phase: SessionPhase;
  trialIndex: number | null;
  trialStartS: number | null;
  remainingS: number;
  layout: PlacedObject[];
  tally: Tally;
}

export class SessionController {
  private ticket: SessionTicket | null = null;
  private level: LevelDefinition | null = null;
  private phase: SessionPhase = "idle";
  private trialIndex: number | null = null;
  private trialStartS: number | null = null;
  private tally: Tally = { c: 0, oe: 0, ce: 0, k: 0 };
  private layouts = new Map<number, PlacedObject[]>();
  // serialize event posts: at most one in flight, later ones queue in order
  private pending: Promise<unknown> = Promise.resolve();

  constructor(private api: ApiClient) {}

  async start(patientId: string, planId: string): Promise<ClientSessionView> {
    this.ticket = await this.api.openSession(patientId, planId);
    const plan = await this.api.getPlan(this.ticket.plan_id);
    this.level = levelAt(plan, this.ticket.level_index);
    this.phase = "in-trial";
    this.trialIndex = 1;
    this.trialStartS = 0;
    return this.view(0);
  }

  view(nowS: number): ClientSessionView {
    const ticket = this.requireTicket();
    let remaining = 0;
    if (this.phase === "in-trial" && this.trialStartS !== null) {
      remaining = this.trialStartS + ticket.theta_s - nowS;
      remaining = Math.min(Math.max(remaining, 0), ticket.theta_s);
    }
    return {
      ticket,
      phase: this.phase,
      trialIndex: this.trialIndex,
      trialStartS: this.trialStartS,
      remainingS: remaining,
      layout: this.trialIndex === null ? [] : this.layoutFor(this.trialIndex),
      tally: { ...this.tally },
    };
  }

  effects(): string | null {
    return this.level?.effects ?? null;
  }

  layoutFor(trialIndex: number): PlacedObject[] {
    const ticket = this.requireTicket();
    if (!this.level) throw new Error("session not started");
    let layout = this.layouts.get(trialIndex);
    if (!layout) {
      layout = placeObjects(this.level, ticket.layout_seed, trialIndex);
      this.layouts.set(trialIndex, layout);
    }
    return layout;
  }

  /** Hit-test a field-space point; posts an event when it lands on a ball. */
  async click(x: number, y: number, atS: number): Promise<EventAck | null> {
    if (this.phase !== "in-trial" || this.trialIndex === null) return null;
    const ball = this.ballAt(x, y, this.trialIndex);
    if (!ball) return null; // clicks on empty field are not events
    return this.send({
      kind: ball.is_target ? "target_hit" : "non_target_hit",
      at_s: atS,
      position: [x, y],
    });
  }

  ballAt(x: number, y: number, trialIndex: number): PlacedObject | null {
    // hit radius equals the rendered radius, no forgiveness margin
    for (const ball of this.layoutFor(trialIndex)) {
      if ((x - ball.x) ** 2 + (y - ball.y) ** 2 <= ball.radius ** 2) {
        return ball;
      }
    }
    return null;
  }

  timeout(atS: number): Promise<EventAck> {
    return this.send({ kind: "trial_timeout", at_s: atS });
  }

  quit(atS: number): Promise<EventAck> {
    return this.send({ kind: "player_quit", at_s: atS });
  }

  finish(): Promise<FinalizeResponse> {
    const ticket = this.requireTicket();
    const done = this.pending.then(() => this.api.finalize(ticket.session_id));
    this.pending = done.catch(() => undefined);
    return done;
  }

  private send(event: GameEvent): Promise<EventAck> {
    const ticket = this.requireTicket();
    const sent = this.pending.then(async () => {
      const ack = await this.api.postEvent(ticket.session_id, event);
      this.applyAck(ack);
      return ack;
    });
    this.pending = sent.catch(() => undefined);
    return sent;
  }

  private applyAck(ack: EventAck): void {
    this.phase = ack.phase;
    this.trialIndex = ack.trial_index;
    this.trialStartS = ack.trial_start_s;
    this.tally = ack.tally;
  }

  private requireTicket(): SessionTicket {
    if (!this.ticket) throw new Error("session not started");
    return this.ticket;
  }
}
