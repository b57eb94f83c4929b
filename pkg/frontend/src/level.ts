// Wire documents the client reads. Field names follow the service JSON.

export interface SizeRule {
  base_radius: number;
  distance_scale: number;
}

export interface Bounds {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
}

export interface ObjectSpec {
  shape: string;
  size_rule: SizeRule;
  placement_bounds: Bounds;
  is_target: boolean;
  visibility_order: number;
}

export interface LevelDefinition {
  objects: ObjectSpec[];
  max_time_s: number;
  trial_time_s: number;
  trials_per_session: number;
  effects?: string | null;
}

export interface GameDefinition {
  game_type: string;
  levels: LevelDefinition[];
}

export interface ProgressionRule {
  window: number;
  advance_threshold: number;
  regress_below: number;
  hold_band?: number | null;
}

export interface TreatmentPlan {
  schema_version: number;
  plan_id: string;
  game: GameDefinition;
  progression: ProgressionRule;
  program_duration?: number | null;
}

/** 1-based level lookup, mirroring the server's plan.game.level(index). */
export function levelAt(plan: TreatmentPlan, levelIndex: number): LevelDefinition {
  const level = plan.game.levels[levelIndex - 1];
  if (!level) {
    throw new Error(`plan ${plan.plan_id} has no level ${levelIndex}`);
  }
  return level;
}
