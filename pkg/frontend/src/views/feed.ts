// Sparkle view: the chronological feed. Poster, content, time, like and
// reply counts, liker avatars; the dialog icon expands reply details;
// clicking a liker or replier avatar opens the Reasoning view. When a
// spark is focused from the calendar, only that spark is shown.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import { avatarGlyph, element, shortTime } from "../format.js";
import { showReasoning } from "./reasoning.js";

const expanded = new Set<string>();

export function renderFeed(root: HTMLElement, store: RunStore, api: ApiClient): void {
  root.replaceChildren();
  const header = element("div", "feed-header");
  header.append(element("h2", "panel-title", "Sparkle"));
  if (store.view.focused_spark) {
    const clear = element("button", "secondary", "show all sparks");
    clear.onclick = () => store.setView({ focused_spark: null });
    header.append(clear);
  }
  root.append(header);

  let sparks = store.feed();
  if (store.view.focused_spark) {
    sparks = sparks.filter((s) => s.spark_id === store.view.focused_spark);
  }
  if (!sparks.length) {
    root.append(element("p", "hint", "No sparks yet."));
    return;
  }

  for (const spark of sparks) {
    const card = element("article", "spark-card");
    const head = element("div", "spark-head");
    const isNpc = store.npcs().some((n) => n.npc_id === spark.author);
    head.append(
      element("span", "avatar small", isNpc ? "📢" : avatarGlyph(store.agentAvatar(spark.author))),
      element("strong", "", store.agentName(spark.author)),
      element("span", "spark-time", shortTime(spark.posted_at)),
    );
    card.append(head, element("p", "spark-content", spark.content));

    const footer = element("div", "spark-footer");
    const likeWrap = element("span", "likes", `♥ ${spark.likes.length}`);
    for (const like of spark.likes) {
      const who = element("button", "avatar tiny", avatarGlyph(store.agentAvatar(like.agent)));
      who.title = `liked by ${store.agentName(like.agent)} — click for reasoning`;
      who.onclick = () => showReasoning(api, store, like.reasoning_ref);
      likeWrap.append(who);
    }
    const replyToggle = element("button", "reply-toggle", `🗨 ${spark.replies.length}`);
    replyToggle.title = "show replies";
    replyToggle.onclick = () => {
      if (expanded.has(spark.spark_id)) expanded.delete(spark.spark_id);
      else expanded.add(spark.spark_id);
      store.notify();
    };
    footer.append(likeWrap, replyToggle);
    card.append(footer);

    if (expanded.has(spark.spark_id)) {
      const list = element("div", "replies");
      for (const reply of spark.replies) {
        const row = element("div", "reply-row");
        const who = element("button", "avatar tiny", avatarGlyph(store.agentAvatar(reply.author)));
        who.title = `${store.agentName(reply.author)} — click for reasoning`;
        who.onclick = () => showReasoning(api, store, reply.reasoning_ref);
        row.append(
          who,
          element("strong", "", store.agentName(reply.author)),
          element("span", "", reply.content),
        );
        list.append(row);
      }
      if (!spark.replies.length) list.append(element("p", "hint", "No replies."));
      card.append(list);
    }
    root.append(card);
  }
}
