export * from "./api.js";
export * from "./scenario.js";
export * from "./poller.js";
export * from "./trajectory.js";
export * from "./compare.js";
export * from "./session.js";
