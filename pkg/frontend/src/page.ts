// Static skeleton injected into #app. IDs are the contract between the
// wiring in app.ts and the tests.

export function pageMarkup(): string {
  return `
  <header class="topbar">
    <h1>askopt</h1>
    <label class="base-field">service
      <input id="base-url" type="text" spellcheck="false" autocomplete="off">
    </label>
  </header>

  <div id="banner" class="banner" hidden>
    <span id="banner-message"></span>
    <button id="banner-retry" type="button">Retry</button>
  </div>

  <main class="columns">
    <section class="panel">
      <h2>New session</h2>
      <form id="create-form" novalidate>
        <label>lower bounds <input id="create-lower" type="text" placeholder="-5, 0" spellcheck="false"></label>
        <label>upper bounds <input id="create-upper" type="text" placeholder="10, 15" spellcheck="false"></label>
        <div class="pair">
          <label>seed <input id="create-seed" type="text" value="0"></label>
          <label>initial points <input id="create-n0" type="text" placeholder="auto"></label>
        </div>
        <div class="pair">
          <label>acquisition
            <select id="create-acquisition">
              <option value="ei" selected>ei</option>
              <option value="aei">aei</option>
              <option value="nlcb">nlcb</option>
              <option value="var">var</option>
              <option value="cei">cei</option>
              <option value="ehvi">ehvi</option>
            </select>
          </label>
          <label>batch size <input id="create-batch" type="text" value="1"></label>
        </div>
        <div id="create-error" class="form-error" hidden></div>
        <button id="create-submit" type="submit">Create session</button>
      </form>

      <h2>Sessions</h2>
      <ul id="session-list" class="session-list"></ul>
    </section>

    <section class="panel grow">
      <div id="notfound" hidden>
        <p id="notfound-message"></p>
        <button id="notfound-forget" type="button">Remove from list</button>
      </div>

      <div id="session-panel" hidden>
        <div class="session-head">
          <h2 id="session-id"></h2>
          <span id="session-status" class="pill"></span>
          <button id="refresh" type="button">Refresh</button>
        </div>
        <dl class="summary">
          <dt>space</dt><dd id="session-space"></dd>
          <dt>rule</dt><dd id="session-rule"></dd>
          <dt>seed</dt><dd id="session-seed"></dd>
          <dt>step</dt><dd id="session-step"></dd>
          <dt>best so far</dt><dd id="session-best"></dd>
        </dl>
        <div id="session-error" class="form-error" hidden></div>

        <div id="ask-panel" hidden>
          <h3>Recommended experiments</h3>
          <form id="tell-form" novalidate>
            <table class="grid">
              <thead id="ask-head"></thead>
              <tbody id="ask-body"></tbody>
            </table>
            <div id="tell-error" class="form-error" hidden></div>
            <button id="tell-submit" type="submit">Submit observations</button>
          </form>
        </div>

        <h3>Best so far</h3>
        <svg id="chart" class="chart" role="img"></svg>

        <h3>History</h3>
        <table class="grid">
          <thead id="history-head"></thead>
          <tbody id="history-body"></tbody>
        </table>
      </div>

      <p id="placeholder" class="muted">Create a session or pick one from the list.</p>
    </section>
  </main>
  `;
}
