/** Transient error/info messages; errors never propagate out of handlers. */

export class ToastArea {
  constructor(private readonly container: HTMLElement) {}

  show(message: string, kind: 'error' | 'info' = 'info'): void {
    const doc = this.container.ownerDocument;
    const toast = doc.createElement('div');
    toast.className = `toast toast-${kind}`;
    toast.textContent = message;
    this.container.appendChild(toast);
  }

  clear(): void {
    this.container.replaceChildren();
  }

  messages(): string[] {
    return Array.from(this.container.children).map((c) => c.textContent ?? '');
  }
}
