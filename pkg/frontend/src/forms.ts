// Structured edit form -> command grammar text. The form is the only edit
// input; free-text natural language is a labeled future extension point.

export type EditFormValue =
  | { verb: "set_floor_count"; target: string; floors: number }
  | { verb: "scale_density"; targetDensity: number; allowMove?: boolean }
  | { verb: "set_style"; target: string; style: string }
  | { verb: "set_component"; target: string; componentType: string; description: string }
  | { verb: "remove_element"; target: string }
  | { verb: "retype_element"; target: string; newType: string }
  | {
      verb: "add_element";
      id: string;
      elementType: string;
      polygon: [number, number][];
      floorCount?: number;
      facade?: string;
    };

function quote(value: string): string {
  return `"${value.replace(/"/g, '\\"')}"`;
}

export function commandFromForm(form: EditFormValue): string {
  switch (form.verb) {
    case "set_floor_count":
      return `set_floor_count ${form.target} ${form.floors}`;
    case "scale_density": {
      const move = form.allowMove ? " allow_move=true" : "";
      return `scale_density block ${form.targetDensity}${move}`;
    }
    case "set_style":
      return `set_style ${form.target} ${form.style}`;
    case "set_component":
      return `set_component ${form.target} ${form.componentType} ${quote(form.description)}`;
    case "remove_element":
      return `remove_element ${form.target}`;
    case "retype_element":
      return `retype_element ${form.target} ${form.newType}`;
    case "add_element": {
      const parts = [
        `add_element block id=${form.id}`,
        `type=${form.elementType}`,
        `polygon=${quote(JSON.stringify(form.polygon))}`,
      ];
      if (form.floorCount !== undefined) parts.push(`floor_count=${form.floorCount}`);
      if (form.facade !== undefined) parts.push(`facade=${quote(form.facade)}`);
      return parts.join(" ");
    }
  }
}

export const VERB_CHOICES = [
  "set_floor_count",
  "scale_density",
  "set_style",
  "set_component",
  "add_element",
  "remove_element",
  "retype_element",
] as const;

export const STYLE_CHOICES = ["chinese", "modern", "industrial", "mediterranean"];
