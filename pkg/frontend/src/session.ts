// Client-side session state: connection, latest snapshot (monotone by seq),
// canal geometry, pilot flag. No control logic lives here.

import type { CanalGeometry, Snapshot, Welcome } from "./protocol.js";

export type ConnectionState = "connecting" | "connected" | "closed";

export class SessionModel {
  connection: ConnectionState = "connecting";
  latest: Snapshot | null = null;
  canal: CanalGeometry | null = null;
  pilot = false;
  hz = 0;
  canalDigest = "";
  droppedFrames = 0;
  inputSource: "gamepad" | "keyboard" = "keyboard";

  applyWelcome(welcome: Welcome): void {
    this.connection = "connected";
    this.pilot = welcome.pilot;
    this.canalDigest = welcome.canal;
    this.hz = welcome.hz;
  }

  /** Accept a snapshot only if it is newer than the last rendered one.
   *  Returns true when the scene should re-render. Counts gaps. */
  acceptSnapshot(snap: Snapshot): boolean {
    if (this.latest !== null && snap.seq <= this.latest.seq) {
      return false;
    }
    if (this.latest !== null && snap.seq > this.latest.seq + 1) {
      this.droppedFrames += snap.seq - this.latest.seq - 1;
    }
    this.latest = snap;
    return true;
  }
}
