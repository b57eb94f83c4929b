import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError, EventAck, GameEvent, SessionTicket } from "../src/api";
import { TreatmentPlan } from "../src/level";
import { SessionController } from "../src/session";

/** Service booted by the global setup; scripted clocks, skew checks off. */
function serverUrl(): string {
  const base = process.env.DROPBALL_TEST_SERVER;
  if (!base) throw new Error("DROPBALL_TEST_SERVER not set; global setup did not run");
  return base;
}

describe("session against the live service", () => {
  let api: ApiClient;

  beforeAll(() => {
    api = new ApiClient(serverUrl());
  });

  it("plays ten scripted trials and the server report matches the script", async () => {
    const patientId = "browser-full";
    await api.createPatient(patientId);
    const plan = await api.suggestedPlan(patientId);
    const controller = new SessionController(api);
    const view = await controller.start(patientId, plan.plan_id);

    expect(view.ticket.theta_s).toBe(60);
    expect(view.ticket.trials_per_session).toBe(10);
    expect(view.phase).toBe("in-trial");
    expect(view.trialIndex).toBe(1);

    // six hits with response times 1..6, two wrong-ball clicks, two timeouts
    const crts = [1, 2, 3, 4, 5, 6];
    let trialStart = 0;
    for (let trial = 1; trial <= 6; trial++) {
      const target = controller.layoutFor(trial).find((o) => o.is_target)!;
      const atS = trialStart + crts[trial - 1];
      const ack = (await controller.click(target.x, target.y, atS))!;
      expect(ack.closed!.index).toBe(trial);
      expect(ack.closed!.outcome.kind).toBe("correct");
      expect(ack.closed!.outcome.crt_s).toBe(crts[trial - 1]);
      expect(ack.tally).toEqual({ c: trial, oe: 0, ce: 0, k: 0 });
      // the local view only ever mirrors the ack
      expect(controller.view(atS).tally).toEqual(ack.tally);
      trialStart = ack.trial_start_s!;
    }
    for (let trial = 7; trial <= 8; trial++) {
      const wrong = controller.layoutFor(trial).find((o) => !o.is_target)!;
      const ack = (await controller.click(wrong.x, wrong.y, trialStart + 0.5))!;
      expect(ack.closed!.outcome.kind).toBe("commission");
      expect(ack.closed!.outcome.elapsed_s).toBe(0.5);
      trialStart = ack.trial_start_s!;
    }
    for (let trial = 9; trial <= 10; trial++) {
      const ack = await controller.timeout(trialStart + 60);
      expect(ack.closed!.outcome.kind).toBe("omission");
      trialStart = ack.trial_start_s ?? 0;
    }

    const finalView = controller.view(142);
    expect(finalView.phase).toBe("ended");
    expect(finalView.tally).toEqual({ c: 6, oe: 2, ce: 2, k: 0 });

    const done = await controller.finish();
    const m = done.report.metrics;
    expect(m.t).toBe(10);
    expect(m.c).toBe(6);
    expect(m.i).toBe(4);
    expect(m.oe).toBe(2);
    expect(m.ce).toBe(2);
    expect(m.k).toBe(0);
    expect(m.gf).toBe(1.0);
    expect(m.iaf).toBeCloseTo(0.2, 12);
    expect(m.imf).toBeCloseTo(0.2, 12);
    expect(m.m_s).toBeCloseTo(3.5, 12);
    expect(m.sd_s).toBeCloseTo(Math.sqrt(3.5), 12);
    expect(m.crf).toBeCloseTo(3.5 / 60, 12);
    expect(m.pi).toBeCloseTo(0.7708333333333334, 12);
    expect(m.gt_s).toBeCloseTo(142, 12);
    expect(m.st_s).toBe(600);

    // one good session clears the advance bar and moves the patient up
    expect(done.progression.action).toBe("advance");
    expect(done.progression.new_level).toBe(2);
    expect(done.progression.window_used).toBe(1);
    const patient = await api.getPatient(patientId);
    expect(patient.current_level).toBe(2);
  });

  it("quitting at trial four keeps three correct and thirty percent engagement", async () => {
    const patientId = "browser-quit";
    await api.createPatient(patientId);
    const plan = await api.suggestedPlan(patientId);
    const controller = new SessionController(api);
    await controller.start(patientId, plan.plan_id);

    let trialStart = 0;
    for (let trial = 1; trial <= 3; trial++) {
      const target = controller.layoutFor(trial).find((o) => o.is_target)!;
      const ack = (await controller.click(target.x, target.y, trialStart + 1))!;
      expect(ack.closed!.outcome.kind).toBe("correct");
      trialStart = ack.trial_start_s!;
    }
    const quitAck = await controller.quit(trialStart + 1);
    expect(quitAck.phase).toBe("ended");
    expect(quitAck.closed!.outcome.kind).toBe("uncompleted");
    expect(quitAck.tally).toEqual({ c: 3, oe: 0, ce: 0, k: 1 });

    const done = await controller.finish();
    const m = done.report.metrics;
    expect(m.t).toBe(10);
    expect(m.c).toBe(3);
    expect(m.k).toBe(7); // the quit swallows trial 4 and the six never played
    expect(m.gf).toBeCloseTo(0.3, 12);
    expect(m.pi).toBeCloseTo(0.2975, 12);
    expect(done.progression.action).toBe("regress");
    expect(done.progression.new_level).toBe(1); // already at the floor
  });

  it("clicks on empty field are not events", async () => {
    const patientId = "browser-miss";
    await api.createPatient(patientId);
    const plan = await api.suggestedPlan(patientId);
    const controller = new SessionController(api);
    await controller.start(patientId, plan.plan_id);

    const layout = controller.layoutFor(1);
    let x = 0;
    let y = 0;
    while (layout.some((b) => (x - b.x) ** 2 + (y - b.y) ** 2 <= b.radius ** 2)) {
      x += 1;
      y = (y + 7) % 100;
    }
    const ack = await controller.click(x, y, 5);
    expect(ack).toBeNull();
    expect(controller.view(5).tally).toEqual({ c: 0, oe: 0, ce: 0, k: 0 });
    await controller.quit(6);
    await controller.finish();
  });

  it("a second simultaneous start for the same patient is refused", async () => {
    const patientId = "browser-dup";
    await api.createPatient(patientId);
    const plan = await api.suggestedPlan(patientId);
    const first = await api.openSession(patientId, plan.plan_id);
    const controller = new SessionController(api);
    let refused: unknown = null;
    try {
      await controller.start(patientId, plan.plan_id);
    } catch (err) {
      refused = err;
    }
    expect(refused).toBeInstanceOf(ApiError);
    expect((refused as ApiError).status).toBe(409);
    await api.finalize(first.session_id);
  });

  it("reports missing patients as 404", async () => {
    let missing: unknown = null;
    try {
      await api.getPatient("browser-ghost");
    } catch (err) {
      missing = err;
    }
    expect(missing).toBeInstanceOf(ApiError);
    expect((missing as ApiError).status).toBe(404);
  });
});

describe("event queue", () => {
  const ticket: SessionTicket = {
    session_id: "s-stub",
    patient_id: "p-stub",
    plan_id: "stub",
    level_index: 1,
    theta_s: 60,
    trials_per_session: 10,
    st_s: 600,
    layout_seed: 0,
  };

  const plan: TreatmentPlan = {
    schema_version: 1,
    plan_id: "stub",
    game: {
      game_type: "drop_the_ball",
      levels: [
        {
          objects: [],
          max_time_s: 600,
          trial_time_s: 60,
          trials_per_session: 10,
        },
      ],
    },
    progression: { window: 3, advance_threshold: 0.7, regress_below: 0.3 },
  };

  function stubApi(post: (event: GameEvent) => Promise<EventAck>): ApiClient {
    const api = new ApiClient("http://unused");
    api.openSession = async () => ticket;
    api.getPlan = async () => plan;
    api.postEvent = (_sid, event) => post(event);
    return api;
  }

  function ackFor(event: GameEvent): EventAck {
    return {
      session_id: ticket.session_id,
      phase: "in-trial",
      trial_index: 2,
      trial_start_s: event.at_s,
      closed: null,
      tally: { c: 0, oe: 1, ce: 0, k: 0 },
    };
  }

  it("sends at most one event at a time, in order", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const seen: number[] = [];
    const api = stubApi(async (event) => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((r) => setTimeout(r, 5));
      seen.push(event.at_s);
      inFlight -= 1;
      return ackFor(event);
    });
    const controller = new SessionController(api);
    await controller.start("p-stub", "stub");

    const sent = [controller.timeout(60), controller.timeout(120), controller.timeout(180)];
    await Promise.all(sent);
    expect(maxInFlight).toBe(1);
    expect(seen).toEqual([60, 120, 180]);
  });

  it("keeps accepting events after one send fails", async () => {
    const api = stubApi(async (event) => {
      if (event.at_s === 120) throw new TypeError("fetch failed");
      return ackFor(event);
    });
    const controller = new SessionController(api);
    await controller.start("p-stub", "stub");

    await controller.timeout(60);
    await expect(controller.timeout(120)).rejects.toThrow("fetch failed");
    const ack = await controller.timeout(180);
    expect(ack.trial_start_s).toBe(180);
  });
});
