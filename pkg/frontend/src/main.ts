import { initDashboard } from "./app.js";

initDashboard(document);
