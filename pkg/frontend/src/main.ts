// Browser bootstrap: wires the controllers to the DOM. The API base URL can
// be overridden with ?api=http://host:port (defaults to same origin).

import { ApiClient, ApiError } from "./api";
import { BookingFlow, DoctorPanel } from "./flows";
import { InboxPoller } from "./poller";
import {
  renderAppointmentCard,
  renderConfirm,
  renderDoctorPanel,
  renderDoctors,
  renderHistory,
  renderInbox,
  renderLogin,
  renderSchedule,
  renderSpecialties,
  renderToast,
  renderWelcome,
} from "./render";
import { ViewStore } from "./state";
import type { SlotView } from "./types";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "");
const store = new ViewStore();
const flow = new BookingFlow(api, store);
const panel = new DoctorPanel(api);

const root = document.getElementById("app") as HTMLElement;
const toasts = document.getElementById("toasts") as HTMLElement;

let username = "";
let poller: InboxPoller | null = null;
let countdownTimer: ReturnType<typeof setInterval> | null = null;
let selectedSlot: SlotView | null = null;
let postponeSummary: string | undefined;

function toast(kind: "info" | "error", text: string) {
  toasts.insertAdjacentHTML("beforeend", renderToast(kind, text));
  const node = toasts.lastElementChild;
  if (node) setTimeout(() => node.remove(), 4000);
}

function fail(error: unknown) {
  if (error instanceof ApiError) toast("error", `${error.code}: ${error.message}`);
  else toast("error", String(error));
}

function stopTimers() {
  if (countdownTimer !== null) {
    clearInterval(countdownTimer);
    countdownTimer = null;
  }
}

async function show(screen: string) {
  stopTimers();
  const session = store.currentSession;
  switch (store.navigate(screen as Parameters<typeof store.navigate>[0])) {
    case "login":
      root.innerHTML = renderLogin();
      break;
    case "welcome":
      root.innerHTML = renderWelcome(username);
      break;
    case "by_day":
      root.innerHTML = renderDoctors(await flow.listDoctors());
      break;
    case "by_specialty":
      root.innerHTML = renderSpecialties(await flow.listSpecialties());
      break;
    case "confirm":
      if (flow.countdown && selectedSlot) {
        const paint = () => {
          const remaining = flow.countdown ? flow.countdown.remainingSeconds() : 0;
          root.innerHTML = renderConfirm(selectedSlot as SlotView, remaining);
          if (remaining === 0) stopTimers();
        };
        paint();
        countdownTimer = setInterval(paint, 1000);
      }
      break;
    case "history":
      if (session) root.innerHTML = renderHistory(await api.history(session.account_id));
      break;
    case "inbox":
      if (session) root.innerHTML = renderInbox(await api.notifications(session.account_id));
      break;
    case "doctor_panel":
      if (session?.doctor_id) root.innerHTML = renderDoctorPanel(session.doctor_id, postponeSummary);
      break;
  }
}

function startInboxPolling() {
  const session = store.currentSession;
  if (!session || session.role !== "patient") return;
  poller = new InboxPoller(
    () => api.notifications(session.account_id),
    (items) => {
      const fresh = items[items.length - 1];
      if (fresh && store.currentScreen === "inbox") void show("inbox");
    },
  );
  poller.start();
}

async function pickSlot(slotId: string) {
  const outcome = await flow.selectSlot(slotId);
  if (outcome.kind === "held" && flow.schedule) {
    selectedSlot = flow.schedule.slots.find((s) => s.slot_id === slotId) ?? null;
    await show("confirm");
  } else if (outcome.kind === "retry") {
    toast("error", `slot unavailable (${outcome.reason}); list refreshed`);
    if (flow.schedule) root.innerHTML = renderSchedule(flow.schedule);
  }
}

async function confirmHold() {
  const outcome = await flow.confirmHold();
  if (outcome.kind === "booked" && selectedSlot) {
    root.innerHTML = renderAppointmentCard(outcome.appointment.appointment_id, selectedSlot);
    toast("info", "appointment confirmed");
  } else if (outcome.kind === "retry") {
    toast("error", `could not confirm (${outcome.reason}); pick again`);
    if (flow.schedule) root.innerHTML = renderSchedule(flow.schedule);
  }
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const nav = target.dataset["nav"];
  const doctor = target.dataset["doctor"];
  const specialty = target.dataset["specialty"];
  const slot = target.dataset["slot"];
  const cancel = target.dataset["cancel"];
  const offerTicket = target.dataset["offerTicket"];
  const action = target.dataset["action"];

  const dispatch = async () => {
    if (nav) await show(nav);
    else if (specialty) root.innerHTML = renderDoctors(await flow.listDoctors(specialty));
    else if (doctor) {
      const doctors = await flow.listDoctors();
      const record = doctors.find((d) => d.doctor_id === doctor);
      if (record) {
        flow.pickDoctor(record);
        const today = new Date().toISOString().slice(0, 10);
        root.innerHTML = renderSchedule(await flow.loadSchedule(today));
      }
    } else if (slot) await pickSlot(slot);
    else if (action === "confirm") await confirmHold();
    else if (action === "back" && flow.schedule) root.innerHTML = renderSchedule(flow.schedule);
    else if (cancel) {
      await flow.cancelAppointment(cancel);
      toast("info", "appointment cancelled");
      await show("welcome");
    } else if (offerTicket) {
      const appointment = await api.confirm(offerTicket);
      toast("info", `offer accepted: ${appointment.appointment_id}`);
      await show("welcome");
    }
  };
  void dispatch().catch(fail);
});

root.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  event.preventDefault();
  const dispatch = async () => {
    if (form.id === "login-form") {
      const data = new FormData(form);
      username = String(data.get("username") ?? "");
      const credential = String(data.get("credential") ?? "");
      const submitter = (event as SubmitEvent).submitter as HTMLElement | null;
      if (submitter?.dataset["action"] === "signup") {
        await api.signup(username, credential);
        toast("info", "account created; logging in");
      }
      const session = await api.login(username, credential);
      store.startSession(session);
      startInboxPolling();
      await show(session.role === "doctor" ? "doctor_panel" : "welcome");
    } else if (form.id === "postpone-form") {
      const session = store.currentSession;
      if (!session?.doctor_id) return;
      const data = new FormData(form);
      const from = new Date(String(data.get("window_from"))).toISOString();
      const to = new Date(String(data.get("window_to"))).toISOString();
      const { summary } = await panel.postpone(session.doctor_id, from, to);
      postponeSummary = summary;
      await show("doctor_panel");
    }
  };
  void dispatch().catch(fail);
});

void show("login");
