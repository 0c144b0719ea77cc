// Error toasts with an optional retry affordance. Failed mutations must
// never be silently lost: the caller passes the retry closure and the
// toast keeps it clickable until dismissed.

export function showToast(
  doc: Document,
  message: string,
  retry?: () => void,
): HTMLElement {
  let host = doc.querySelector<HTMLElement>("#toasts");
  if (!host) {
    host = doc.createElement("div");
    host.id = "toasts";
    doc.body.appendChild(host);
  }
  const toast = doc.createElement("div");
  toast.className = "toast error";
  toast.setAttribute("role", "alert");
  const text = doc.createElement("span");
  text.textContent = message;
  toast.appendChild(text);
  if (retry) {
    const button = doc.createElement("button");
    button.className = "retry";
    button.textContent = "Retry";
    button.addEventListener("click", () => {
      toast.remove();
      retry();
    });
    toast.appendChild(button);
  }
  const close = doc.createElement("button");
  close.className = "close";
  close.textContent = "×";
  close.addEventListener("click", () => toast.remove());
  toast.appendChild(close);
  host.appendChild(toast);
  return toast;
}
