import { ApiClient } from "./api.js";
import { bindKeyboard, render } from "./render.js";
import { ReviewStore } from "./state.js";

const api = new ApiClient("");
const store = new ReviewStore(api);
const container = document.getElementById("app");
if (!container) throw new Error("missing #app container");

store.subscribe((state) => render(container, store, state));
bindKeyboard(store);
void store.loadAliases();
void store.load();
