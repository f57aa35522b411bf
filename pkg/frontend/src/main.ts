import { ApiClient, ApiError, FetchLike } from "./api.js";
import { deltasAgainstBaseline, formatSigned, utilization } from "./compare.js";
import { emptyDraft, loadExemplarPreset, PRESET_NAMES } from "./presets.js";
import { validateDraft } from "./shapes.js";
import {
  Activation,
  ComparisonRow,
  DesignDraft,
  EstimateResponse,
  HlsConfigDraft,
  LayerKind,
  Padding,
  TARGETS,
} from "./types.js";

const LAYER_KINDS: LayerKind[] = [
  "dense", "conv1d", "conv2d", "maxpool1d", "maxpool2d",
  "avgpool1d", "avgpool2d", "flatten", "activation", "batchnorm",
];
const ACTIVATIONS: Activation[] = ["linear", "relu", "tanh", "sigmoid", "softmax"];
const PADDINGS: Padding[] = ["none", "same", "valid"];
const DEBOUNCE_MS = 300;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function option(value: string, label = value): HTMLOptionElement {
  return el("option", { value }, label);
}

export class StudioApp {
  draft: DesignDraft = emptyDraft();
  pinned: ComparisonRow[] = [];
  baselineIndex = 0;
  lastResponse: EstimateResponse | null = null;

  private api: ApiClient;
  private abort: AbortController | null = null;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private pinCounter = 0;

  constructor(
    private root: HTMLElement,
    fetchImpl: FetchLike,
  ) {
    this.api = new ApiClient(fetchImpl);
    this.buildSkeleton();
    this.renderEditor();
    void this.populateModels();
  }

  // ------------------------------------------------------------------ DOM

  private buildSkeleton(): void {
    this.root.innerHTML = `
      <header class="bar">
        <h1>what-if design explorer</h1>
        <label>preset
          <select id="preset-select"><option value="">custom</option></select>
        </label>
        <label>model
          <select id="model-select"><option value="">auto</option></select>
        </label>
      </header>
      <main class="columns">
        <section class="editor">
          <h2>architecture</h2>
          <div id="input-shape" class="row">
            <label>input dims
              <input id="input-dim0" type="number" min="1">
              <input id="input-dim1" type="number" min="1">
              <input id="input-dim2" type="number" min="1">
            </label>
          </div>
          <table id="layers-table">
            <thead><tr>
              <th>kind</th><th>units/filters</th><th>kernel</th><th>stride</th>
              <th>padding</th><th>activation</th><th></th>
            </tr></thead>
            <tbody></tbody>
          </table>
          <button id="add-layer-btn" type="button">add layer</button>
          <h2>conversion config</h2>
          <div id="config-form" class="grid"></div>
          <h2>board capacity (optional)</h2>
          <textarea id="capacity-input" rows="2"
            placeholder='{"bram": 2688, "dsp": 12288, "ff": 3456000, "lut": 1728000}'></textarea>
          <div id="capacity-error" class="error"></div>
        </section>
        <section class="results">
          <h2>prediction</h2>
          <button id="estimate-btn" type="button">estimate</button>
          <div id="result-error" class="error"></div>
          <dl id="result-panel"></dl>
          <div id="result-meta"></div>
          <button id="pin-btn" type="button" disabled>pin for comparison</button>
          <h2>comparison</h2>
          <table id="compare-table"><thead></thead><tbody></tbody></table>
        </section>
      </main>`;

    const presetSelect = this.q<HTMLSelectElement>("#preset-select");
    for (const name of PRESET_NAMES) presetSelect.appendChild(option(name));
    presetSelect.addEventListener("change", () => {
      const preset = loadExemplarPreset(presetSelect.value);
      if (preset) {
        const kept = { modelKind: this.draft.modelKind, checkpoint: this.draft.checkpoint, capacity: this.draft.capacity };
        this.draft = { ...preset, ...kept };
        this.renderEditor();
        this.scheduleEstimate();
      }
    });

    this.q("#model-select").addEventListener("change", () => {
      const value = this.q<HTMLSelectElement>("#model-select").value;
      this.draft.checkpoint = value || null;
      this.scheduleEstimate();
    });
    this.q("#estimate-btn").addEventListener("click", () => void this.estimateNow());
    this.q("#pin-btn").addEventListener("click", () => this.pinCurrent());
    this.q("#add-layer-btn").addEventListener("click", () => {
      this.draft.layers.push({
        kind: "dense", units_or_filters: 16, kernel_size: 1, stride: 1,
        padding: "none", activation: "relu",
      });
      this.renderEditor();
      this.scheduleEstimate();
    });
    this.q("#capacity-input").addEventListener("input", () => this.readCapacity());
  }

  private q<T extends Element = HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
  }

  private async populateModels(): Promise<void> {
    try {
      const models = await this.api.listModels();
      const select = this.q<HTMLSelectElement>("#model-select");
      for (const model of models) {
        select.appendChild(option(model.id, `${model.id} (${model.kind})`));
      }
    } catch {
      /* service without a catalog is still usable via auto selection */
    }
  }

  // --------------------------------------------------------------- editor

  renderEditor(): void {
    const dims = this.draft.inputShape;
    for (let i = 0; i < 3; i++) {
      const input = this.q<HTMLInputElement>(`#input-dim${i}`);
      input.value = String(dims[i]);
      input.oninput = () => {
        this.draft.inputShape[i] = Number(input.value);
        this.scheduleEstimate();
      };
    }

    const body = this.q<HTMLTableSectionElement>("#layers-table tbody");
    body.innerHTML = "";
    this.draft.layers.forEach((layer, index) => {
      const row = el("tr", { class: "layer-row" });

      const kindSelect = el("select", { "data-field": "kind" });
      for (const kind of LAYER_KINDS) kindSelect.appendChild(option(kind));
      kindSelect.value = layer.kind;
      kindSelect.onchange = () => {
        layer.kind = kindSelect.value as LayerKind;
        if (layer.kind === "dense") {
          layer.kernel_size = 1;
          layer.stride = 1;
          layer.padding = "none";
        }
        this.renderEditor();
        this.scheduleEstimate();
      };
      row.appendChild(el("td")).appendChild(kindSelect);

      const numeric = (field: "units_or_filters" | "kernel_size" | "stride") => {
        const input = el("input", {
          type: "number", min: "1", value: String(layer[field]), "data-field": field,
        });
        input.oninput = () => {
          layer[field] = Number(input.value);
          this.scheduleEstimate();
        };
        return input;
      };
      row.appendChild(el("td")).appendChild(numeric("units_or_filters"));
      row.appendChild(el("td")).appendChild(numeric("kernel_size"));
      row.appendChild(el("td")).appendChild(numeric("stride"));

      const paddingSelect = el("select", { "data-field": "padding" });
      for (const padding of PADDINGS) paddingSelect.appendChild(option(padding));
      paddingSelect.value = layer.padding;
      paddingSelect.onchange = () => {
        layer.padding = paddingSelect.value as Padding;
        this.scheduleEstimate();
      };
      row.appendChild(el("td")).appendChild(paddingSelect);

      const actSelect = el("select", { "data-field": "activation" });
      for (const act of ACTIVATIONS) actSelect.appendChild(option(act));
      actSelect.value = layer.activation;
      actSelect.onchange = () => {
        layer.activation = actSelect.value as Activation;
        this.scheduleEstimate();
      };
      row.appendChild(el("td")).appendChild(actSelect);

      const remove = el("button", { type: "button", class: "remove-layer" }, "✕");
      remove.onclick = () => {
        this.draft.layers.splice(index, 1);
        this.renderEditor();
        this.scheduleEstimate();
      };
      row.appendChild(el("td")).appendChild(remove);
      body.appendChild(row);
    });

    this.renderConfigForm();
  }

  private renderConfigForm(): void {
    const form = this.q("#config-form");
    form.innerHTML = "";
    const config = this.draft.config;
    type NumericKey = {
      [K in keyof HlsConfigDraft]: HlsConfigDraft[K] extends number ? K : never;
    }[keyof HlsConfigDraft];
    type StringKey = {
      [K in keyof HlsConfigDraft]: HlsConfigDraft[K] extends string ? K : never;
    }[keyof HlsConfigDraft];

    const numberField = (key: NumericKey, step = "1") => {
      const label = el("label", {}, `${key} `);
      const input = el("input", {
        type: "number", step, id: `cfg-${key}`, value: String(config[key]),
      });
      input.oninput = () => {
        config[key] = Number(input.value);
        this.scheduleEstimate();
      };
      label.appendChild(input);
      form.appendChild(label);
    };
    const selectField = (key: StringKey, values: string[]) => {
      const label = el("label", {}, `${key} `);
      const select = el("select", { id: `cfg-${key}` });
      for (const value of values) select.appendChild(option(value));
      select.value = config[key];
      select.onchange = () => {
        config[key] = select.value as never;
        this.scheduleEstimate();
      };
      label.appendChild(select);
      form.appendChild(label);
    };
    const textField = (key: StringKey) => {
      const label = el("label", {}, `${key} `);
      const input = el("input", { type: "text", id: `cfg-${key}`, value: config[key] });
      input.oninput = () => {
        config[key] = input.value as never;
        this.scheduleEstimate();
      };
      label.appendChild(input);
      form.appendChild(label);
    };

    numberField("precision_total_bits");
    numberField("precision_int_bits");
    numberField("reuse_factor");
    selectField("strategy", ["latency", "resource"]);
    selectField("io_type", ["io_parallel", "io_stream"]);
    numberField("clock_ns", "0.5");
    textField("target_part");
    textField("vivado_version");
    textField("hls4ml_version");
  }

  private readCapacity(): void {
    const raw = this.q<HTMLTextAreaElement>("#capacity-input").value.trim();
    const errorBox = this.q("#capacity-error");
    errorBox.textContent = "";
    if (!raw) {
      this.draft.capacity = null;
    } else {
      try {
        this.draft.capacity = JSON.parse(raw) as Record<string, number>;
      } catch {
        errorBox.textContent = "capacity profile must be JSON";
        return;
      }
    }
    this.renderComparison();
  }

  // ------------------------------------------------------------- estimate

  scheduleEstimate(): void {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => void this.estimateNow(), DEBOUNCE_MS);
  }

  async estimateNow(): Promise<void> {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    const errorBox = this.q("#result-error");
    const problems = validateDraft(this.draft.inputShape, this.draft.layers, this.draft.config);
    if (problems.length) {
      this.showError(problems.join("; "));
      return;
    }
    this.abort?.abort();
    this.abort = new AbortController();
    try {
      const response = await this.api.estimate(this.draft, this.abort.signal);
      this.lastResponse = response;
      errorBox.textContent = "";
      this.renderResult(response);
      (this.q("#pin-btn") as HTMLButtonElement).disabled = false;
    } catch (error) {
      if (error instanceof DOMException && error.name === "AbortError") return;
      const message =
        error instanceof ApiError
          ? `${error.message}${error.detail ? ": " + JSON.stringify(error.detail) : ""}`
          : String(error);
      this.showError(message);
    }
  }

  private showError(message: string): void {
    this.q("#result-error").textContent = message;
    // never leave stale numbers next to an error
    this.lastResponse = null;
    this.q("#result-panel").innerHTML = "";
    this.q("#result-meta").textContent = "";
    (this.q("#pin-btn") as HTMLButtonElement).disabled = true;
  }

  /** Every displayed number is the verbatim service response value. */
  private renderResult(response: EstimateResponse): void {
    const panel = this.q("#result-panel");
    panel.innerHTML = "";
    for (const target of TARGETS) {
      panel.appendChild(el("dt", {}, target));
      panel.appendChild(
        el("dd", { "data-target": target }, String(response.predictions[target])),
      );
    }
    panel.appendChild(el("dt", {}, "bops"));
    panel.appendChild(el("dd", { "data-target": "bops" }, String(response.bops)));
    this.q("#result-meta").textContent =
      `${response.model.kind} · ${response.model.id} · ` +
      `${response.model.checkpoint_hash.slice(0, 12)} · ${response.inference_ms.toFixed(1)} ms`;
  }

  // ---------------------------------------------------------------- pins

  pinCurrent(): void {
    if (!this.lastResponse) return;
    this.pinCounter += 1;
    this.pinned.push(
      Object.freeze({
        label: `#${this.pinCounter} ${this.draft.name} r=${this.draft.config.reuse_factor}`,
        draft: JSON.parse(JSON.stringify(this.draft)) as DesignDraft,
        response: JSON.parse(JSON.stringify(this.lastResponse)) as EstimateResponse,
      }),
    );
    this.renderComparison();
  }

  renderComparison(): void {
    const table = this.q<HTMLTableElement>("#compare-table");
    const head = table.querySelector("thead") as HTMLTableSectionElement;
    const body = table.querySelector("tbody") as HTMLTableSectionElement;
    head.innerHTML = "";
    body.innerHTML = "";
    if (this.pinned.length === 0) return;
    if (this.baselineIndex >= this.pinned.length) this.baselineIndex = 0;

    const header = el("tr");
    header.appendChild(el("th", {}, "baseline"));
    header.appendChild(el("th", {}, "pinned"));
    for (const target of TARGETS) header.appendChild(el("th", {}, target));
    header.appendChild(el("th", {}, "bops"));
    head.appendChild(header);

    const deltas = deltasAgainstBaseline(this.pinned, this.baselineIndex);
    this.pinned.forEach((row, index) => {
      const tr = el("tr", { class: "pinned-row" });
      const radioCell = el("td");
      const radio = el("input", { type: "radio", name: "baseline" }) as HTMLInputElement;
      radio.checked = index === this.baselineIndex;
      radio.onchange = () => {
        this.baselineIndex = index;
        this.renderComparison();
      };
      radioCell.appendChild(radio);
      tr.appendChild(radioCell);
      tr.appendChild(el("td", { class: "pin-label" }, row.label));

      const useBars = row.draft.capacity || this.draft.capacity;
      const bars = utilization(row.response, row.draft.capacity ?? this.draft.capacity);
      for (const target of TARGETS) {
        const cell = el("td", { "data-col": target });
        cell.appendChild(
          el("span", { "data-value": target }, String(row.response.predictions[target])),
        );
        if (index !== this.baselineIndex) {
          cell.appendChild(
            el("span", { class: "delta", "data-delta": target }, ` (${formatSigned(deltas[index][target])})`),
          );
        }
        const fraction = bars[target];
        if (useBars && fraction !== undefined) {
          const bar = el("div", { class: "util-bar", "data-util": target });
          const fill = el("div", {
            class: `util-fill${fraction > 1 ? " over" : ""}`,
            style: `width:${Math.min(100, fraction * 100).toFixed(1)}%`,
          });
          bar.title = `${(fraction * 100).toFixed(1)}% of ${target.toUpperCase()} capacity`;
          bar.appendChild(fill);
          cell.appendChild(bar);
        }
        tr.appendChild(cell);
      }
      const bopsCell = el("td", { "data-col": "bops" });
      bopsCell.appendChild(el("span", { "data-value": "bops" }, String(row.response.bops)));
      if (index !== this.baselineIndex) {
        bopsCell.appendChild(
          el("span", { class: "delta", "data-delta": "bops" }, ` (${formatSigned(deltas[index].bops)})`),
        );
      }
      tr.appendChild(bopsCell);
      body.appendChild(tr);
    });
  }
}

export function initApp(root: HTMLElement, fetchImpl: FetchLike): StudioApp {
  return new StudioApp(root, fetchImpl);
}

declare global {
  interface Window {
    studio?: StudioApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.studio = initApp(
    document.getElementById("app") as HTMLElement,
    (input, init) => window.fetch(input, init),
  );
}
