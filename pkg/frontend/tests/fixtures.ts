/** Small CSV fixtures matching the simulator's output schemas. */

import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "lcl-plots-"));
}

const TRAJ_HEADER = "t,mass,px,py,pz,energy,entropy_est,linf_est,rho_hat,w2_est,skipped_pairs";

export function writeTrajectory(dir: string, name = "trajectory.csv"): string {
  const rows = [
    TRAJ_HEADER,
    "0,1,0.001,-0.002,0.0005,3.01,-4.2,0.062,,,0",
    "0.1,1,0.001,-0.002,0.0005,3.009,-4.21,0.0621,,,0",
    "0.2,1,0.001,-0.002,0.0005,3.0105,-4.22,0.0619,,,0",
    "0.3,1,0.001,-0.002,0.0005,3.0102,-4.23,0.062,,,0",
  ];
  const path = join(dir, name);
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}

export function writeCoupling(dir: string, zero = false): string {
  const rho = zero ? ["0", "0", "0"] : ["0.01", "0.012", "0.013"];
  const w2 = zero ? ["0", "0", "0"] : ["0.1", "0.11", "0.115"];
  const rows = [
    TRAJ_HEADER,
    `0,1,0,0,0,3.0,-4.2,0.062,${rho[0]},${w2[0]},0`,
    `0.1,1,0,0,0,3.0,-4.2,0.062,${rho[1]},${w2[1]},0`,
    `0.2,1,0,0,0,3.0,-4.2,0.062,${rho[2]},${w2[2]},0`,
  ];
  const path = join(dir, "coupling.csv");
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}

export function writeEnvelope(dir: string, zero = false): string {
  const env = zero ? ["0", "0", "0"] : ["0.01", "0.02", "0.035"];
  const rows = [
    "t,linf_first,linf_second,gamma_c1,envelope_c1",
    `0,0.062,0.062,1.124,${env[0]}`,
    `0.1,0.062,0.062,1.124,${env[1]}`,
    `0.2,0.062,0.062,1.124,${env[2]}`,
  ];
  const path = join(dir, "envelope.csv");
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}

export function writeStability(dir: string): string {
  const rows = [
    "shift,rho0,w2_0,sup_rho_hat,sup_w2,final_rho_hat,final_w2",
    "0.2,0.04,0.2,0.052,0.228,0.05,0.22",
    "0.1,0.01,0.1,0.014,0.118,0.013,0.11",
    "0.05,0.0025,0.05,0.004,0.063,0.0035,0.06",
  ];
  const path = join(dir, "stability.csv");
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}

export function writeRatios(dir: string): string {
  const rows = [
    "name,x,lhs,budget,ratio",
    "coupled_b,0.0001,0.0022,0.001,2.09",
    "coupled_b,0.01,0.125,0.06,2.11",
    "coupled_b,1,2.2,1.05,2.1",
    "coupled_sigma,0.0001,1.2e-07,2e-07,0.58",
    "coupled_sigma,0.01,0.00065,0.0011,0.6",
    "coupled_sigma,1,1.4,1.9,0.73",
  ];
  const path = join(dir, "oracle_ratios.csv");
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}

export function writeBadCoupling(dir: string): string {
  // drops the rho_hat and w2_est columns
  const rows = [
    "t,mass,px,py,pz,energy,entropy_est,linf_est,skipped_pairs",
    "0,1,0,0,0,3.0,-4.2,0.062,0",
  ];
  const path = join(dir, "coupling.csv");
  writeFileSync(path, rows.join("\r\n") + "\r\n");
  return path;
}
