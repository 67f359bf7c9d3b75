// Wire messages shared with the bridge (docs/protocol.md). The cockpit only
// parses and forwards; it never computes control decisions itself.

export type Vec3 = [number, number, number];

export interface ObjectSummary {
  id: string;
  p: Vec3;
  state: "free" | "grasped" | "placed";
}

export interface Snapshot {
  v: 1;
  kind: "snapshot";
  seq: number;
  t: number;
  pose: Vec3;
  orient: [number, number, number, number];
  s: number;
  rho: number;
  phi: number;
  mode: "idle" | "advancing" | "correcting" | "finished" | "stopped" | "fault";
  direction: 1 | -1;
  gripper: "open" | "closed";
  disk_class: "horizontal" | "facing" | "sideways-left" | "sideways-right" | null;
  a_x: Vec3 | null;
  a_y: Vec3 | null;
  d_x: 1 | -1 | null;
  d_y: 1 | -1 | null;
  objects: ObjectSummary[];
  canal: string;
}

export interface Welcome {
  v: 1;
  kind: "welcome";
  role: "pilot" | "observer";
  pilot: boolean;
  canal: string;
  hz: number;
}

export interface Ack {
  v: 1;
  kind: "ack";
  ok: true;
  warnings: string[];
  client_t?: number;
}

export interface ErrorReply {
  v: 1;
  kind: "error";
  ok: false;
  error: string;
}

export type ServerMessage = Snapshot | Welcome | Ack | ErrorReply;

export interface CanalGeometry {
  format: "canal";
  v: 1;
  n_states: number;
  d: Vec3[];
  e_t: Vec3[];
  r: number[];
  x_axis: Vec3[];
  y_axis: Vec3[];
  q: [number, number, number, number][];
}

export type StickInput = { kind: "stick"; u: number; v: number; client_t?: number };
export type ButtonName = "start" | "stop" | "toggle_direction" | "toggle_gripper";
export type ButtonInput = { kind: "button"; button: ButtonName; client_t?: number };
export type WireInput = StickInput | ButtonInput;

const MODES = new Set(["idle", "advancing", "correcting", "finished", "stopped", "fault"]);
const CLASSES = new Set(["horizontal", "facing", "sideways-left", "sideways-right"]);

function isVec3(x: unknown): x is Vec3 {
  return Array.isArray(x) && x.length === 3 && x.every((v) => typeof v === "number" && isFinite(v));
}

export function parseServerMessage(line: string): ServerMessage {
  let data: any;
  try {
    data = JSON.parse(line);
  } catch {
    throw new Error("unparseable server message");
  }
  if (data?.v !== 1 || typeof data.kind !== "string") {
    throw new Error("missing version or kind");
  }
  switch (data.kind) {
    case "snapshot":
      return validateSnapshot(data);
    case "welcome":
      if (typeof data.canal !== "string" || typeof data.pilot !== "boolean") {
        throw new Error("malformed welcome");
      }
      return data as Welcome;
    case "ack":
      if (data.ok !== true || !Array.isArray(data.warnings)) {
        throw new Error("malformed ack");
      }
      return data as Ack;
    case "error":
      if (typeof data.error !== "string") throw new Error("malformed error reply");
      return data as ErrorReply;
    default:
      throw new Error(`unknown message kind ${data.kind}`);
  }
}

export function validateSnapshot(data: any): Snapshot {
  if (
    typeof data.seq !== "number" ||
    typeof data.t !== "number" ||
    !isVec3(data.pose) ||
    !Array.isArray(data.orient) ||
    data.orient.length !== 4 ||
    typeof data.s !== "number" ||
    !MODES.has(data.mode) ||
    (data.direction !== 1 && data.direction !== -1) ||
    (data.gripper !== "open" && data.gripper !== "closed") ||
    typeof data.canal !== "string" ||
    !Array.isArray(data.objects)
  ) {
    throw new Error("malformed snapshot");
  }
  if (data.disk_class !== null) {
    if (!CLASSES.has(data.disk_class) || !isVec3(data.a_x) || !isVec3(data.a_y) ||
        Math.abs(data.d_x) !== 1 || Math.abs(data.d_y) !== 1) {
      throw new Error("malformed snapshot mapping fields");
    }
  }
  for (const obj of data.objects) {
    if (typeof obj.id !== "string" || !isVec3(obj.p)) {
      throw new Error("malformed snapshot object");
    }
  }
  return data as Snapshot;
}

export function validateCanal(data: any): CanalGeometry {
  if (data?.format !== "canal" || data.v !== 1 || typeof data.n_states !== "number") {
    throw new Error("not a canal geometry document");
  }
  for (const key of ["d", "e_t", "r", "x_axis", "y_axis"]) {
    if (!Array.isArray(data[key]) || data[key].length !== data.n_states) {
      throw new Error(`canal array ${key} has the wrong length`);
    }
  }
  return data as CanalGeometry;
}

export function encodeInput(input: WireInput): string {
  return JSON.stringify(input);
}
