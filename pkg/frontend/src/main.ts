// Session flow wiring: connect -> choose role -> ready -> countdown -> drive
// -> result screen with a replay scrubber; rematch starts a fresh session.

import { InputController } from "./input.js";
import { NetClient } from "./net.js";
import { inputMessage, readyMessage, ServerMessage } from "./protocol.js";
import { renderFrame } from "./render.js";
import { ReplayBuffer } from "./replay.js";
import { ViewModel } from "./viewmodel.js";

const INPUT_HZ = 20;

const canvas = document.getElementById("track") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const roleOverlay = document.getElementById("role-overlay")!;
const readyButton = document.getElementById("ready") as HTMLButtonElement;
const resultOverlay = document.getElementById("result-overlay")!;
const resultLabel = document.getElementById("result-label")!;
const rematchButton = document.getElementById("rematch") as HTMLButtonElement;
const scrubber = document.getElementById("scrubber") as HTMLInputElement;
const banner = document.getElementById("banner")!;

const vm = new ViewModel();
const input = new InputController();
const replay = new ReplayBuffer();
let scrubbing = false;
let driving = false;

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const net = new NetClient(wsUrl, {
  onOpen: () => {
    vm.connection = "open";
    banner.classList.add("hidden");
  },
  onClose: () => {
    vm.connection = "closed";
    if (vm.phase !== "finished") {
      banner.textContent = `connection lost — session ${vm.session ?? "?"} — reconnecting…`;
      banner.classList.remove("hidden");
      setTimeout(() => net.reconnect(), 1000);
    }
  },
  onMessage: (msg: ServerMessage) => {
    if (msg.type === "state") {
      vm.push(msg, performance.now());
      replay.push(msg);
      if (msg.phase === "running") {
        readyButton.classList.add("hidden");
        driving = vm.role === "driver";
      }
      if (msg.phase === "finished") showResult(msg.outcome ?? "");
    } else if (msg.type === "result") {
      showResult(msg.outcome);
    }
  },
});

function showResult(outcome: string): void {
  driving = false;
  resultLabel.textContent =
    outcome === "overtaking_success" ? "You overtook the ego robot" : "Blocked";
  resultOverlay.classList.remove("hidden");
  scrubber.max = String(Math.max(replay.length - 1, 0));
  scrubber.value = scrubber.max;
}

document.querySelectorAll<HTMLButtonElement>("[data-role]").forEach((button) => {
  button.addEventListener("click", () => {
    const role = button.dataset.role === "driver" ? "driver" : "spectator";
    roleOverlay.classList.add("hidden");
    if (role === "spectator") readyButton.classList.add("hidden");
    net.connect(role);
  });
});

readyButton.addEventListener("click", () => {
  net.send(readyMessage());
  readyButton.disabled = true;
});

rematchButton.addEventListener("click", () => {
  net.close();
  net.session = null;
  replay.clear();
  resultOverlay.classList.add("hidden");
  readyButton.classList.remove("hidden");
  readyButton.disabled = false;
  net.connect(vm.role === "driver" ? "driver" : "spectator");
});

scrubber.addEventListener("input", () => {
  scrubbing = true;
});
scrubber.addEventListener("change", () => {
  scrubbing = true;
});

window.addEventListener("keydown", (e) => {
  input.keyDown(e.code);
  if (["ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight"].includes(e.code)) {
    e.preventDefault();
  }
});
window.addEventListener("keyup", (e) => input.keyUp(e.code));
window.addEventListener("blur", () => input.blur());

function gamepadSample() {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  for (const pad of pads) {
    if (pad && pad.connected) return { axes: [...pad.axes] };
  }
  return null;
}

// 20 Hz input sender; pausing while unfocused lets the server's decay rule run
setInterval(() => {
  if (!driving || !document.hasFocus()) return;
  const command = input.tick(1 / INPUT_HZ, gamepadSample());
  net.send(inputMessage(command.v, command.omega, performance.now() / 1000));
}, 1000 / INPUT_HZ);

function frame(): void {
  const width = canvas.clientWidth;
  const height = canvas.clientHeight;
  if (canvas.width !== width || canvas.height !== height) {
    canvas.width = width;
    canvas.height = height;
  }
  if (scrubbing && replay.length > 0) {
    const snapshot = replay.at(Number(scrubber.value));
    if (snapshot) {
      renderFrame(ctx, width, height, snapshot, { ego: snapshot.ego, opp: snapshot.opp });
    }
  } else {
    renderFrame(ctx, width, height, vm.latest, vm.poses(performance.now()));
  }
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
