/** Browser entry point; inert when no DOM is present (tests import modules
 * directly instead). */

import { wireUi } from "./ui.js";

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => wireUi(document));
  } else {
    wireUi(document);
  }
}
