import { WorkbenchClient } from "./api.js";
import { BoardView } from "./ui.js";

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

const annotator = param("annotator", "");
const token = param("token", annotator);
if (!annotator) {
  document.body.innerHTML = "<p>Missing ?annotator=... in the URL.</p>";
} else {
  const client = new WorkbenchClient("", token);
  const view = new BoardView(
    document.getElementById("app")!,
    client,
    window.localStorage,
    {
      annotator,
      vetter: param("role", "") === "vetter",
      instructionsVideoUrl: param("video", "") || null,
    },
  );
  void view.loadNext();
}
